//! Instance JSON: `{"tree": <path or inline graph>, "r": int, "vars": {v: [{"domain",
//! "dist"}]}, "events": {"builtin": name, ...params}, "p"?: float}`.

use super::probability::exact_with;
use super::LllError;
use crate::graph_core::io::GraphDoc;
use crate::graph_core::{Graph, VertexId};
use crate::rng::{derive, rng_from};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub domain: u32,
    pub dist: Vec<f64>,
}

impl Variable {
    pub fn fair_coin() -> Self {
        Variable { domain: 2, dist: vec![0.5, 0.5] }
    }

    pub fn uniform(domain: u32) -> Self {
        Variable { domain, dist: vec![1.0 / domain as f64; domain as usize] }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, &q) in self.dist.iter().enumerate() {
            acc += q;
            if x < acc {
                return a as u32;
            }
        }
        // rounding slack lands on the last value with positive mass
        self.dist.iter().rposition(|&q| q > 0.0).unwrap_or(0) as u32
    }

    /// Probability of value `a`; zero outside the domain.
    pub fn mass(&self, a: u32) -> f64 {
        self.dist.get(a as usize).copied().unwrap_or(0.0)
    }

    fn validate(&self) -> Result<(), LllError> {
        let sum: f64 = self.dist.iter().sum();
        if self.domain == 0
            || self.dist.len() != self.domain as usize
            || self.dist.iter().any(|&q| !(0.0..=1.0).contains(&q))
            || (sum - 1.0).abs() > 1e-9
        {
            return Err(LllError::InvalidInstance(format!("bad distribution {:?} over {} values", self.dist, self.domain)));
        }
        Ok(())
    }
}

/// The predicate shared by all vertices. It only sees the values of the event's scope,
/// ordered by owning vertex id and then by position within the vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum EventSpec {
    /// All scope variables take the same value.
    AllEqualBall,
    /// More than `threshold` of the scope variables are nonzero.
    MajorityBall {
        #[serde(default = "half")]
        threshold: f64,
    },
    /// Per-vertex truth tables over the scope's joint domain, first variable least
    /// significant. Vertices without a table never see their event.
    CustomTable { tables: BTreeMap<VertexId, Vec<u8>> },
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeSource {
    Path(String),
    Inline(GraphDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LLLInstanceDoc {
    pub tree: TreeSource,
    pub r: usize,
    pub vars: BTreeMap<VertexId, Vec<Variable>>,
    pub events: EventSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LLLInstance {
    tree: Graph,
    r: usize,
    // distinct distributions, shared by index
    kinds: Vec<Variable>,
    kind: Vec<u32>,
    owner: Vec<VertexId>,
    start: Vec<usize>,
    scope: Vec<Vec<VarId>>,
    event: EventSpec,
    p: f64,
}

impl LLLInstance {
    /// Builds the instance and computes every event's exact probability. A declared
    /// `p` below that maximum is rejected; without one, the maximum is used.
    pub fn new(
        tree: Graph,
        r: usize,
        vars: Vec<Vec<Variable>>,
        event: EventSpec,
        declared_p: Option<f64>,
    ) -> Result<Self, LllError> {
        if r == 0 || r % 2 == 1 {
            return Err(LllError::OddRadius(r));
        }
        if !tree.is_tree() {
            return Err(LllError::InvalidInstance("host graph must be a tree".into()));
        }
        if vars.len() != tree.n() {
            return Err(LllError::InvalidInstance(format!("{} variable lists for {} vertices", vars.len(), tree.n())));
        }
        let mut kinds: Vec<Variable> = Vec::new();
        let mut index: HashMap<(u32, Vec<u64>), u32> = HashMap::new();
        let lists: Vec<Vec<u32>> = vars
            .into_iter()
            .map(|list| {
                list.into_iter()
                    .map(|x| {
                        x.validate()?;
                        let key = (x.domain, x.dist.iter().map(|q| q.to_bits()).collect());
                        Ok(*index.entry(key).or_insert_with(|| {
                            kinds.push(x);
                            kinds.len() as u32 - 1
                        }))
                    })
                    .collect::<Result<Vec<u32>, LllError>>()
            })
            .collect::<Result<_, _>>()?;
        LLLInstance::build(tree, r, kinds, lists, event, declared_p)
    }

    /// `count` variables per vertex, all distributed as `var`.
    pub fn uniform_family(
        tree: Graph,
        r: usize,
        count: usize,
        var: Variable,
        event: EventSpec,
        declared_p: Option<f64>,
    ) -> Result<Self, LllError> {
        if r == 0 || r % 2 == 1 {
            return Err(LllError::OddRadius(r));
        }
        if !tree.is_tree() {
            return Err(LllError::InvalidInstance("host graph must be a tree".into()));
        }
        var.validate()?;
        let lists = vec![vec![0u32; count]; tree.n()];
        LLLInstance::build(tree, r, vec![var], lists, event, declared_p)
    }

    fn build(
        tree: Graph,
        r: usize,
        kinds: Vec<Variable>,
        lists: Vec<Vec<u32>>,
        event: EventSpec,
        declared_p: Option<f64>,
    ) -> Result<Self, LllError> {
        let mut kind = Vec::new();
        let mut owner = Vec::new();
        let mut start = vec![0];
        for (v, list) in lists.into_iter().enumerate() {
            owner.extend(std::iter::repeat(v).take(list.len()));
            kind.extend(list);
            start.push(kind.len());
        }
        let scope: Vec<Vec<VarId>> = (0..tree.n())
            .map(|v| {
                let mut ball: Vec<VertexId> = tree.ball(v, r / 2).into_iter().map(|(u, _)| u).collect();
                ball.sort_unstable();
                ball.into_iter().flat_map(|u| start[u]..start[u + 1]).collect()
            })
            .collect();
        if let EventSpec::CustomTable { tables } = &event {
            for (&v, table) in tables {
                if v >= tree.n() {
                    return Err(LllError::InvalidInstance(format!("table for missing vertex {v}")));
                }
                let states = scope[v].iter().try_fold(1u128, |acc, &x| acc.checked_mul(kinds[kind[x] as usize].domain as u128));
                if states != Some(table.len() as u128) {
                    return Err(LllError::InvalidInstance(format!(
                        "table of vertex {v} has {} entries, joint domain has {states:?}",
                        table.len()
                    )));
                }
            }
        }
        if let EventSpec::MajorityBall { threshold } = event {
            if !(0.0..=1.0).contains(&threshold) {
                return Err(LllError::InvalidInstance(format!("majority threshold {threshold}")));
            }
        }
        let mut inst = LLLInstance { tree, r, kinds, kind, owner, start, scope, event, p: 1.0 };
        // beyond the enumeration cap only a declared p can be taken
        let mut exact = 0.0f64;
        for v in 0..inst.n() {
            match exact_with(&inst, v, |_| None) {
                Ok(q) => exact = exact.max(q),
                Err(e) if declared_p.is_none() => return Err(e),
                Err(_) => {}
            }
        }
        inst.p = match declared_p {
            Some(d) if d + 1e-12 < exact => return Err(LllError::DeclaredPTooSmall { declared: d, exact }),
            Some(d) => d,
            None => exact,
        };
        Ok(inst)
    }

    /// Fair coin per vertex, event "every coin within distance `r/2` shows the same face".
    pub fn all_equal_coins(tree: Graph, r: usize) -> Result<Self, LllError> {
        let vars = vec![vec![Variable::fair_coin()]; tree.n()];
        LLLInstance::new(tree, r, vars, EventSpec::AllEqualBall, None)
    }

    /// Resolves a tree path relative to `base`.
    pub fn from_doc(doc: &LLLInstanceDoc, base: Option<&Path>) -> Result<Self, LllError> {
        let gdoc = match &doc.tree {
            TreeSource::Inline(g) => g.clone(),
            TreeSource::Path(p) => {
                let path = match base {
                    Some(b) => b.join(p),
                    None => p.into(),
                };
                GraphDoc::read(&path)?
            }
        };
        let tree = gdoc.graph()?;
        let mut vars = vec![Vec::new(); tree.n()];
        for (&v, list) in &doc.vars {
            if v >= tree.n() {
                return Err(LllError::InvalidInstance(format!("variables for missing vertex {v}")));
            }
            vars[v] = list.clone();
        }
        LLLInstance::new(tree, doc.r, vars, doc.events.clone(), doc.p)
    }

    pub fn from_json(s: &str, base: Option<&Path>) -> Result<Self, LllError> {
        let doc: LLLInstanceDoc = serde_json::from_str(s).map_err(|e| LllError::InvalidInstance(e.to_string()))?;
        LLLInstance::from_doc(&doc, base)
    }

    pub fn to_doc(&self) -> LLLInstanceDoc {
        LLLInstanceDoc {
            tree: TreeSource::Inline(GraphDoc::from_graph(&self.tree)),
            r: self.r,
            vars: (0..self.n())
                .filter(|&v| self.start[v] < self.start[v + 1])
                .map(|v| (v, self.vertex_vars(v).map(|x| self.var(x).clone()).collect()))
                .collect(),
            events: self.event.clone(),
            p: Some(self.p),
        }
    }

    pub fn tree(&self) -> &Graph {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn num_vars(&self) -> usize {
        self.kind.len()
    }

    pub fn var(&self, x: VarId) -> &Variable {
        &self.kinds[self.kind[x] as usize]
    }

    pub fn owner(&self, x: VarId) -> VertexId {
        self.owner[x]
    }

    pub fn vertex_vars(&self, v: VertexId) -> std::ops::Range<VarId> {
        self.start[v]..self.start[v + 1]
    }

    /// vbl(E(v)): the variables of every vertex within distance `r/2`.
    pub fn scope(&self, v: VertexId) -> &[VarId] {
        &self.scope[v]
    }

    pub fn event(&self) -> &EventSpec {
        &self.event
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `d = Δ^r`.
    pub fn d(&self) -> f64 {
        (self.tree.max_degree() as f64).powi(self.r as i32)
    }

    pub fn ed(&self) -> f64 {
        std::f64::consts::E * self.d()
    }

    /// Evaluates E(v) on the values of its scope, in scope order.
    pub fn occurs_on(&self, v: VertexId, values: &[u32]) -> bool {
        match &self.event {
            EventSpec::AllEqualBall => values.windows(2).all(|w| w[0] == w[1]),
            EventSpec::MajorityBall { threshold } => {
                let ones = values.iter().filter(|&&a| a != 0).count();
                ones as f64 > threshold * values.len() as f64
            }
            EventSpec::CustomTable { tables } => match tables.get(&v) {
                None => false,
                Some(t) => {
                    let mut idx = 0usize;
                    let mut stride = 1usize;
                    for (&x, &a) in self.scope[v].iter().zip(values) {
                        idx += a as usize * stride;
                        stride *= self.var(x).domain as usize;
                    }
                    t[idx] != 0
                }
            },
        }
    }

    /// Whether E(v) occurs under a total assignment.
    pub fn occurs(&self, v: VertexId, assignment: &[u32]) -> bool {
        let values: Vec<u32> = self.scope[v].iter().map(|&x| assignment[x]).collect();
        self.occurs_on(v, &values)
    }

    /// The validity oracle: every event evaluated directly.
    pub fn occurring_events(&self, assignment: &[u32]) -> Vec<VertexId> {
        use rayon::prelude::*;
        (0..self.n()).into_par_iter().filter(|&v| self.occurs(v, assignment)).collect()
    }

    /// Independent draw of every variable, each from its own stream.
    pub fn sample_all(&self, seed: u64) -> Vec<u32> {
        (0..self.num_vars())
            .map(|x| self.var(x).sample(&mut rng_from(derive(seed, &[x as u64]))))
            .collect()
    }
}

/// Values of some variables; `None` is unset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialAssignment {
    pub values: Vec<Option<u32>>,
}

impl PartialAssignment {
    pub fn unset(num_vars: usize) -> Self {
        PartialAssignment { values: vec![None; num_vars] }
    }

    pub fn from_total(values: &[u32]) -> Self {
        PartialAssignment { values: values.iter().map(|&a| Some(a)).collect() }
    }

    pub fn get(&self, x: VarId) -> Option<u32> {
        self.values[x]
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn unset_count(&self) -> usize {
        self.values.iter().filter(|a| a.is_none()).count()
    }

    pub fn to_total(&self) -> Option<Vec<u32>> {
        self.values.iter().copied().collect()
    }

    /// Checks that every value lies in its variable's domain.
    pub fn check(&self, inst: &LLLInstance) -> Result<(), LllError> {
        if self.values.len() != inst.num_vars() {
            return Err(LllError::InvalidInstance(format!(
                "{} values for {} variables",
                self.values.len(),
                inst.num_vars()
            )));
        }
        for (x, a) in self.values.iter().enumerate() {
            if let Some(a) = *a {
                if a >= inst.var(x).domain {
                    return Err(LllError::InvalidInstance(format!("value {a} outside the domain of variable {x}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::build_graph;

    fn path(n: usize) -> Graph {
        build_graph(&(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>(), None).unwrap()
    }

    #[test]
    fn scopes_are_balls() {
        let inst = LLLInstance::all_equal_coins(path(5), 2).unwrap();
        assert_eq!(inst.scope(0), &[0, 1]);
        assert_eq!(inst.scope(2), &[1, 2, 3]);
        assert!((inst.p() - 0.5).abs() < 1e-15);
        assert!((inst.d() - 4.0).abs() < 1e-15);
        let inst = LLLInstance::all_equal_coins(path(5), 4).unwrap();
        assert_eq!(inst.scope(2), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(LLLInstance::all_equal_coins(path(3), 3).unwrap_err(), LllError::OddRadius(3));
        let cyc = build_graph(&[(0, 1), (1, 2), (2, 0)], None).unwrap();
        assert!(matches!(LLLInstance::all_equal_coins(cyc, 2), Err(LllError::InvalidInstance(_))));
        let bad = vec![vec![Variable { domain: 2, dist: vec![0.5, 0.6] }]; 2];
        assert!(LLLInstance::new(path(2), 2, bad, EventSpec::AllEqualBall, None).is_err());
        let coins = vec![vec![Variable::fair_coin()]; 3];
        let r = LLLInstance::new(path(3), 2, coins.clone(), EventSpec::AllEqualBall, Some(0.3));
        assert!(matches!(r, Err(LllError::DeclaredPTooSmall { .. })));
        let tables = BTreeMap::from([(0, vec![0, 1])]);
        let r = LLLInstance::new(path(3), 2, coins, EventSpec::CustomTable { tables }, None);
        assert!(matches!(r, Err(LllError::InvalidInstance(_))));
    }

    #[test]
    fn custom_table_indexing() {
        // vertex 0 sees (x0, x1); table true only at x0 = 1, x1 = 0 -> index 1
        let coins = vec![vec![Variable::fair_coin()]; 2];
        let tables = BTreeMap::from([(0, vec![0, 1, 0, 0])]);
        let inst = LLLInstance::new(path(2), 2, coins, EventSpec::CustomTable { tables }, None).unwrap();
        assert!(inst.occurs(0, &[1, 0]));
        assert!(!inst.occurs(0, &[0, 1]));
        assert!(!inst.occurs(1, &[1, 0]));
        assert!((inst.p() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn json_roundtrip() {
        let inst = LLLInstance::all_equal_coins(path(6), 2).unwrap();
        let s = serde_json::to_string(&inst.to_doc()).unwrap();
        let back = LLLInstance::from_json(&s, None).unwrap();
        assert_eq!(back.to_doc(), inst.to_doc());
        let s = r#"{"tree": {"n": 2, "edges": [[0, 1]]}, "r": 2,
                    "vars": {"0": [{"domain": 3, "dist": [0.2, 0.3, 0.5]}]},
                    "events": {"builtin": "majority_ball"}}"#;
        let inst = LLLInstance::from_json(s, None).unwrap();
        assert_eq!(inst.num_vars(), 1);
        assert!((inst.p() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn sampling_follows_the_distribution() {
        let x = Variable { domain: 3, dist: vec![0.0, 0.25, 0.75] };
        let mut r = rng_from(1);
        let mut counts = [0usize; 3];
        for _ in 0..40_000 {
            counts[x.sample(&mut r) as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        assert!((counts[1] as f64 / 40_000.0 - 0.25).abs() < 0.01);
    }
}
