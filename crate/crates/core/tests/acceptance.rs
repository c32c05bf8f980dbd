//! Acceptance suite. Runs every criterion in sequence so each runtime is measured
//! alone, prints one PASS/FAIL line per criterion, and exits nonzero if any fails.

use local_ec::constants::{LINIAL_BETA, MIXED_LAMBDA_C, ORIENTED_ROUNDS_C, SMALL_C, TWO_PART_C};
use local_ec::graph_core::{
    random_bounded_degree_tree, random_regular_bipartite_graph, random_regular_graph, random_tree,
    verify_proper_edge_coloring, Graph,
};
use local_ec::lll::{bernoulli_infection, find_small_stable_set, moser_tardos, solve_tree_lll, tau_for, verify_stable_small, LLLInstance};
use local_ec::lower_bounds::{
    build_gstar, check_certificate, ec_to_sinkless, exhaustive_completion, forced_recolor_check, grid_minimum,
    layer_sizes, verify_gstar, verify_sinkless, zero_round_floor, Method, PerfectOracle, RecolorOutcome,
};
use local_ec::nibble::{color_graph, compute_schedule, concentration_experiment, ColorOptions};
use local_ec::rng::rng_from;
use local_ec::symmetry::log_star;
use local_ec::tree_decomp::{
    decompose_mixed, decompose_two_part, oriented_tree_plus_one_coloring, tree_delta_edge_coloring, verify_decomposition,
    DecompParams, PartKind,
};
use rand::seq::SliceRandom;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// A criterion's verdict: `Err` carries the first reason it failed.
type Verdict = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, || format!("took {t:.1?}, limit {limit:?}"))
}

fn shuffled_ids(n: usize, seed: u64) -> Vec<u64> {
    let mut ids: Vec<u64> = (0..n as u64).collect();
    ids.shuffle(&mut rng_from(seed));
    ids
}

fn schedule_fidelity() -> Verdict {
    let start = Instant::now();
    let s = compute_schedule(100_000_000, 0.5, 1e-3, 1e3).map_err(|e| e.to_string())?;
    let g = 1.0 - (-2.0f64).exp();
    let expected = [g, g * g, g * g, 1.0 / g];
    check(s.rows.len() >= 11, || format!("only {} rows", s.rows.len()))?;
    let mut worst = 0.0f64;
    for w in s.rows[..11].windows(2) {
        let (a, b) = (w[0], w[1]);
        let ratios = [b.d / a.d, b.t / a.t, b.p / a.p, b.beta / a.beta];
        for (j, (r, e)) in ratios.iter().zip(expected).enumerate() {
            let err = (r / e - 1.0).abs();
            worst = worst.max(err);
            check(err <= 0.01, || format!("row {}: ratio {j} is {r}, expected {e}", a.i))?;
        }
    }
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("worst relative error {:.3}%", 100.0 * worst))
}

fn end_to_end_coloring() -> Verdict {
    let start = Instant::now();
    let limit = Duration::from_secs(120);
    let opts = ColorOptions { max_retries: 10, ..Default::default() };
    let mut done = 0;
    for seed in 0..20u64 {
        // the criterion has already failed on time; stop instead of running on
        if start.elapsed() >= limit {
            return Err(format!("time limit reached after {done} of 20 seeds, all proper so far"));
        }
        let g = random_regular_graph(4096, 64, seed).map_err(|e| e.to_string())?;
        let out = color_graph(&g, 0.5, seed, &opts).map_err(|e| format!("seed {seed}: {e}"))?;
        let rep = verify_proper_edge_coloring(&g, &out.coloring).map_err(|e| e.to_string())?;
        check(rep.is_proper_total(), || format!("seed {seed}: coloring is not proper"))?;
        let top = out.coloring.max_color().unwrap_or(0);
        check(top <= 96, || format!("seed {seed}: color {top} > 96"))?;
        let retries = out.iterations.iter().map(|s| s.retries).max().unwrap_or(0);
        check(retries <= 10, || format!("seed {seed}: {retries} retries"))?;
        done += 1;
    }
    within_time(start, limit)?;
    Ok("20 seeds proper within 96 colors".into())
}

fn concentration() -> Verdict {
    let start = Instant::now();
    let s = concentration_experiment(100, 10_000, 50, 7).map_err(|e| e.to_string())?;
    let pairs = [("S", s.mean_s, s.d_diamond), ("N_c", s.mean_nc, s.t_diamond), ("Psi", s.mean_psi, s.p_diamond)];
    let mut notes = Vec::new();
    for (name, mean, target) in pairs {
        let err = mean / target - 1.0;
        check(err.abs() <= 0.02, || format!("mean |{name}| = {mean:.3} vs {target:.3}"))?;
        notes.push(format!("{name} {:+.2}%", 100.0 * err));
    }
    check(s.tail_s < 1e-3, || format!("upper tail frequency {}", s.tail_s))?;
    within_time(start, Duration::from_secs(300))?;
    Ok(format!("{}, tail {}", notes.join(", "), s.tail_s))
}

fn zero_round() -> Verdict {
    let start = Instant::now();
    let mut notes = Vec::new();
    for delta in 2..=4 {
        let min = grid_minimum(delta, 20).map_err(|e| e.to_string())?;
        let floor = zero_round_floor(delta);
        check(min.exact >= floor, || format!("Δ={delta}: minimum {} below {floor}", min.value))?;
        notes.push(format!("Δ={delta}: {} ≥ {floor}", min.value));
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(notes.join("; "))
}

fn contagion() -> Verdict {
    let start = Instant::now();
    let (n, delta, r, mu) = (100_000, 8usize, 2, 4);
    let q0 = (std::f64::consts::E * (delta * delta) as f64).powi(-16);
    let tau = tau_for(n, mu);
    let bound = SMALL_C * (n as f64).log2();
    let mut stable = 0;
    let mut infected = 0;
    for seed in 0..100u64 {
        let t = random_bounded_degree_tree(n, delta, seed).map_err(|e| e.to_string())?;
        let inf = bernoulli_infection(n, q0, seed ^ 0x5eed);
        infected += inf.iter().filter(|&&x| x).count();
        let (s, _) = find_small_stable_set(&t.graph, &inf, r, mu, tau);
        let rep = verify_stable_small(&t.graph, &s, &inf, r, mu, SMALL_C);
        stable += usize::from(rep.stable);
        let worst = rep.components.iter().map(|c| c.dominating).max().unwrap_or(0);
        check(worst as f64 <= bound, || format!("seed {seed}: dominating set {worst} > {bound:.1}"))?;
    }
    check(stable >= 99, || format!("stable on {stable} of 100 runs"))?;
    within_time(start, Duration::from_secs(300))?;
    Ok(format!("stable on {stable}/100, {infected} vertices infected in total at q0 = {q0:.2e}"))
}

fn tree_lll() -> Verdict {
    let start = Instant::now();
    let mut retries = 0;
    for seed in 0..100u64 {
        let t = random_bounded_degree_tree(10_000, 5, seed).map_err(|e| e.to_string())?;
        let inst = LLLInstance::all_equal_coins(t.graph, 2).map_err(|e| e.to_string())?;
        let mt = moser_tardos(&inst, seed, 10_000_000);
        let out = solve_tree_lll(&inst, seed, 3);
        check(mt.is_ok() == out.is_ok(), || format!("seed {seed}: Moser–Tardos {:?}, pipeline {:?}", mt.is_ok(), out.as_ref().err()))?;
        let out = out.map_err(|e| format!("seed {seed}: {e}"))?;
        let bad = inst.occurring_events(&out.assignment);
        check(bad.is_empty(), || format!("seed {seed}: {} events occur", bad.len()))?;
        check(out.retries <= 3, || format!("seed {seed}: {} retries", out.retries))?;
        retries += out.retries;
    }
    within_time(start, Duration::from_secs(600))?;
    Ok(format!("100 instances solved, {retries} retries in total"))
}

// largest number of other marked vertices within distance k of a marked vertex
fn marked_degree(g: &Graph, labels: &[usize], k: usize) -> usize {
    (0..g.n())
        .filter(|&v| labels[v] != 0)
        .map(|v| g.ball(v, k).into_iter().filter(|&(u, _)| u != v && labels[u] != 0).count())
        .max()
        .unwrap_or(0)
}

fn decomposition_bounds() -> Verdict {
    let start = Instant::now();
    let n = 10_000;
    let mut worst_ratio = 0.0f64;
    let mut over_lambda = Vec::new();
    for seed in 0..100u64 {
        let t = random_tree(n, seed).map_err(|e| e.to_string())?;
        let ids = shuffled_ids(n, seed);
        for k in 1..=2 {
            let run = decompose_two_part(&t.graph, &ids, &DecompParams::trivial(k, n)).map_err(|e| e.to_string())?;
            let rep = verify_decomposition(&t.graph, &run.decomposition).map_err(|e| e.to_string())?;
            check(rep.passes() && rep.separated(), || format!("seed {seed}, k={k}: two-part decomposition fails verification"))?;
            let limit = TWO_PART_C as f64 * k as f64 * (n as f64).log2();
            let diam = rep.parts.iter().map(|p| p.max_t_diameter).max().unwrap_or(0);
            check(diam as f64 <= limit, || format!("seed {seed}, k={k}: diameter {diam} > {limit:.0}"))?;
            worst_ratio = worst_ratio.max(diam as f64 / limit);

            let lambda = MIXED_LAMBDA_C * k;
            let run = decompose_mixed(&t.graph, &ids, &DecompParams::trivial(k, n), lambda).map_err(|e| e.to_string())?;
            let dec = &run.decomposition;
            let rep = verify_decomposition(&t.graph, dec).map_err(|e| e.to_string())?;
            check(rep.independence_violations.is_empty(), || {
                format!("seed {seed}, k={k}: {} pairs in one zero class within distance k", rep.independence_violations.len())
            })?;
            check(dec.kinds[1..].iter().all(|&kind| kind == PartKind::Zero), || "mixed classes must be zero parts".into())?;
            let md = marked_degree(&t.graph, &dec.labels, k);
            if md > lambda {
                over_lambda.push(format!("seed {seed} k={k}: {md} > {lambda}"));
            }
        }
    }
    check(over_lambda.is_empty(), || {
        format!(
            "marked graph degree exceeds λ in {} of 200 runs (first: {})",
            over_lambda.len(),
            over_lambda.first().cloned().unwrap_or_default()
        )
    })?;
    within_time(start, Duration::from_secs(300))?;
    Ok(format!("largest diameter is {:.1}% of C·k·log₂ n", 100.0 * worst_ratio))
}

fn tree_edge_coloring() -> Verdict {
    let start = Instant::now();
    let n = 2000;
    let mut worst_rounds = 0;
    for seed in 0..1000u64 {
        let target = 3 + seed as usize % 10;
        let t = random_bounded_degree_tree(n, target, seed).map_err(|e| e.to_string())?;
        let delta = t.graph.max_degree();
        if delta < 3 {
            return Err(format!("seed {seed}: tree of maximum degree {delta}"));
        }
        let ids = shuffled_ids(n, seed);
        let run = tree_delta_edge_coloring(&t.graph, &ids).map_err(|e| format!("seed {seed}: {e}"))?;
        let rep = verify_proper_edge_coloring(&t.graph, &run.coloring).map_err(|e| e.to_string())?;
        check(rep.is_proper_total(), || format!("seed {seed}: Δ-coloring is not proper"))?;
        let top = run.coloring.max_color().unwrap_or(0) as usize;
        check(top <= delta, || format!("seed {seed}: color {top} > Δ = {delta}"))?;

        let o = oriented_tree_plus_one_coloring(&t, &ids).map_err(|e| format!("seed {seed}: {e}"))?;
        let rep = verify_proper_edge_coloring(&t.graph, &o.coloring).map_err(|e| e.to_string())?;
        check(rep.is_proper_total(), || format!("seed {seed}: (Δ+1)-coloring is not proper"))?;
        let top = o.coloring.max_color().unwrap_or(0) as usize;
        check(top <= delta + 1, || format!("seed {seed}: color {top} > Δ+1 = {}", delta + 1))?;
        let limit = ORIENTED_ROUNDS_C * (log_star(n as u64) + 1) + 4 * LINIAL_BETA as usize;
        check(o.rounds <= limit, || format!("seed {seed}: {} rounds > {limit}", o.rounds))?;
        worst_rounds = worst_rounds.max(o.rounds);
    }
    within_time(start, Duration::from_secs(120))?;
    Ok(format!("1000 trees, oriented coloring used at most {worst_rounds} rounds"))
}

fn vizing_gadget() -> Verdict {
    let start = Instant::now();
    let s = layer_sizes(5, 1, 12).map_err(|e| e.to_string())?;
    check((s.k, s.kprime) == (3, 2), || format!("k, k′ = {}, {}", s.k, s.kprime))?;
    check(s.n == [3, 3, 3, 6, 9, 12, 18, 27, 42, 63, 93, 141], || format!("n_i = {:?}", s.n))?;
    check(s.l == [1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 0], || format!("l_i = {:?}", s.l))?;
    for ell in 1..=12 {
        let g = build_gstar(5, 1, ell, ell as u64).map_err(|e| e.to_string())?;
        let rep = verify_gstar(&g);
        check(rep.passes(), || format!("ℓ={ell}: {:?}", rep.violations))?;
    }
    let g = build_gstar(5, 1, 8, 0).map_err(|e| e.to_string())?;
    let cert = match forced_recolor_check(&g, 6).map_err(|e| e.to_string())? {
        RecolorOutcome::Certificate(c) => c,
        other => return Err(format!("no certificate: {other:?}")),
    };
    check_certificate(&g, &cert)?;
    check(cert.method == Method::Propagation && cert.contradiction.is_some(), || "certificate lacks a contradiction".into())?;
    // cross-check on the largest sub-instance the exhaustive search takes
    let (found, nodes) = exhaustive_completion(&g, 8).map_err(|e| e.to_string())?;
    check(found.is_none(), || "exhaustive search found a completion".into())?;
    let small = match forced_recolor_check(&g, 8).map_err(|e| e.to_string())? {
        RecolorOutcome::Certificate(c) => c,
        other => return Err(format!("frozen-top 8: no certificate: {other:?}")),
    };
    check_certificate(&g, &small)?;
    within_time(start, Duration::from_secs(120))?;
    Ok(format!("{} forcing steps; exhaustive search agrees after {nodes} nodes", cert.steps.len()))
}

fn reduction_soundness() -> Verdict {
    let start = Instant::now();
    let oracle = PerfectOracle { rounds: 2 };
    for delta in 3..=5 {
        for seed in 0..50u64 {
            let g = random_regular_bipartite_graph(1000, delta, seed).map_err(|e| e.to_string())?;
            let run = ec_to_sinkless(&g, delta, &oracle, seed).map_err(|e| e.to_string())?;
            let rep = verify_sinkless(&g, &run.orientation, delta);
            check(rep.sinkless(), || format!("Δ={delta}, seed {seed}: {} sinks", rep.sinks.len()))?;
            check(run.rounds == run.color_rounds + 1, || format!("Δ={delta}, seed {seed}: {} rounds", run.rounds))?;
        }
    }
    within_time(start, Duration::from_secs(60))?;
    Ok("150 runs, no sinks, one extra round".into())
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("schedule fidelity", schedule_fidelity),
        ("end-to-end coloring", end_to_end_coloring),
        ("concentration", concentration),
        ("zero-round floor", zero_round),
        ("contagion correctness", contagion),
        ("tree LLL validity", tree_lll),
        ("decomposition bounds", decomposition_bounds),
        ("tree edge coloring", tree_edge_coloring),
        ("gadget and forced recoloring", vizing_gadget),
        ("reduction soundness", reduction_soundness),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let line = match verdict {
            Ok(note) => format!("criterion {:>2} {name}: PASS ({secs:.1}s) {note}", i + 1),
            Err(why) => {
                failed += 1;
                format!("criterion {:>2} {name}: FAIL ({secs:.1}s) {why}", i + 1)
            }
        };
        writeln!(out, "{line}").unwrap();
        out.flush().unwrap();
    }
    writeln!(out, "acceptance: {} passed, {failed} failed", criteria.len() - failed).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
