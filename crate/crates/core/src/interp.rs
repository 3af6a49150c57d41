//! Exact execution of typechecked programs on unnormalized density matrices.
//!
//! The interpreter carries a set of edge states. Each one is a density matrix
//! whose trace is the probability of reaching the current program point along
//! a particular sequence of measurement outcomes, together with that sequence
//! (its history). A measurement splits every edge in two; the branches run
//! independently and are joined again afterwards. Summing the edges at any
//! point gives the merged state with the classical outcomes forgotten.
//!
//! `while q { body }` measures `q` at the head of every iteration, leaves on
//! outcome 0 and runs the body on outcome 1. The exact meaning is an infinite
//! sum; iteration stops once the trace still inside the loop drops below
//! `loop_tol` (or after `max_iters` rounds) and that remaining trace is
//! reported as `loop_residual` instead of being renormalized away.
//!
//! Histories multiply with every measurement, so the edges of one program
//! point are capped by `edge_budget`. When a measurement would exceed it, all
//! edges at that point are summed into a single edge whose history is their
//! common prefix followed by `*`. The merged state and all traces stay exact;
//! only the resolution of the outcome distribution is lost.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::densmat::{
    apply_gate_in_place, extend_with_fresh_qubit, measure_split, partial_trace, permute_qubits,
    ComplexMatrix, DensError, DensityMatrix, QubitIndex,
};
use crate::gates::Gate;
use crate::lang::{Block, StmtKind, TypedProgram};

#[derive(Debug, Clone, PartialEq)]
pub struct InterpConfig {
    pub max_qubits: usize,
    pub loop_tol: f64,
    pub max_iters: usize,
    /// Report the individual edges reaching the end of `main`.
    pub keep_branches: bool,
    /// Initial state bound, in order, to the first `new qbit` statements of
    /// `main`.
    pub input_state: Option<DensityMatrix>,
    /// Edges whose trace falls to this value or below after a measurement are
    /// dropped; their mass is reported in `pruned_trace`.
    pub prune_tol: f64,
    /// Most matrix entries (edges × dim²) kept at one program point before
    /// edges are coalesced.
    pub edge_budget: usize,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            max_qubits: 10,
            loop_tol: 1e-9,
            max_iters: 10_000,
            keep_branches: false,
            input_state: None,
            prune_tol: 1e-15,
            edge_budget: 1 << 22,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpError {
    #[error("program needs more than {cap} qubits")]
    QubitCapExceeded { cap: usize },
    #[error("input state: {0}")]
    InputState(String),
    #[error(transparent)]
    Dens(#[from] DensError),
}

/// One recorded measurement outcome.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HistoryEntry {
    pub name: String,
    /// Loop iteration for measurements taken at a `while` head.
    pub iteration: Option<usize>,
    pub bit: u8,
}

impl fmt::Display for HistoryEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.iteration {
            Some(k) => write!(f, "{}@{}={}", self.name, k, self.bit),
            None => write!(f, "{}={}", self.name, self.bit),
        }
    }
}

/// `p=0,q@1=1,...`: comma-joined outcomes in measurement order.
pub fn history_key(history: &[HistoryEntry]) -> String {
    history
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Key of an edge in the outcome distribution: its history, plus a trailing
/// `*` for coalesced edges.
pub fn outcome_key(history: &[HistoryEntry], coalesced: bool) -> String {
    let mut key = history_key(history);
    if coalesced {
        if !key.is_empty() {
            key.push(',');
        }
        key.push('*');
    }
    key
}

/// A density matrix on one control-flow edge, with the register layout and
/// the outcomes that led there.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeState {
    pub rho: DensityMatrix,
    /// Qubit names by register position (position 0 most significant).
    pub qubits: Vec<String>,
    pub history: Vec<HistoryEntry>,
    /// Several histories extending `history` were summed into this edge.
    pub coalesced: bool,
}

impl EdgeState {
    pub fn key(&self) -> String {
        outcome_key(&self.history, self.coalesced)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub merged: EdgeState,
    pub branches: Option<Vec<EdgeState>>,
    pub outcome_distribution: BTreeMap<String, f64>,
    pub loop_residual: f64,
    pub pruned_trace: f64,
}

/// Probability bookkeeping at a statement boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    /// Trace of the edges flowing through the statement just executed.
    pub live: f64,
    /// Trace parked on other edges (sibling branches, finished loop exits).
    pub pending: f64,
    pub loop_residual: f64,
    pub pruned: f64,
    /// Trace of the initial state.
    pub initial: f64,
}

impl Checkpoint {
    pub fn total(&self) -> f64 {
        self.live + self.pending + self.loop_residual + self.pruned
    }

    pub fn defect(&self) -> f64 {
        (self.total() - self.initial).abs()
    }
}

type QubitId = usize;
type Env = BTreeMap<String, QubitId>;

#[derive(Clone)]
struct Edge {
    rho: DensityMatrix,
    history: Vec<HistoryEntry>,
    coalesced: bool,
}

struct Flow {
    register: Vec<QubitId>,
    edges: Vec<Edge>,
}

fn trace_sum(edges: &[Edge]) -> f64 {
    edges.iter().map(|e| e.rho.trace()).sum()
}

struct Exec<'a> {
    program: &'a TypedProgram,
    cfg: &'a InterpConfig,
    next_id: QubitId,
    input_ids: VecDeque<QubitId>,
    pending: f64,
    residual: f64,
    pruned: f64,
    initial: f64,
    gates: BTreeMap<Gate, ComplexMatrix>,
    observer: &'a mut dyn FnMut(&Checkpoint),
}

impl Exec<'_> {
    fn observe(&mut self, flow: &Flow) {
        let cp = Checkpoint {
            live: trace_sum(&flow.edges),
            pending: self.pending,
            loop_residual: self.residual,
            pruned: self.pruned,
            initial: self.initial,
        };
        (self.observer)(&cp);
    }

    fn position(flow: &Flow, env: &Env, name: &str) -> QubitIndex {
        let id = env[name];
        QubitIndex(
            flow.register
                .iter()
                .position(|&q| q == id)
                .expect("live qubits are in the register"),
        )
    }

    fn split(
        &mut self,
        edges: Vec<Edge>,
        pos: QubitIndex,
        name: &str,
        iteration: Option<usize>,
    ) -> Result<(Vec<Edge>, Vec<Edge>), InterpError> {
        let mut zero = Vec::with_capacity(edges.len());
        let mut one = Vec::with_capacity(edges.len());
        for e in edges {
            let (r0, r1) = measure_split(&e.rho, pos)?;
            for (bit, rho, out) in [(0u8, r0, &mut zero), (1u8, r1, &mut one)] {
                let tr = rho.trace();
                if tr <= self.cfg.prune_tol {
                    self.pruned += tr;
                    continue;
                }
                let mut history = e.history.clone();
                history.push(HistoryEntry {
                    name: name.to_string(),
                    iteration,
                    bit,
                });
                out.push(Edge {
                    rho,
                    history,
                    coalesced: e.coalesced,
                });
            }
        }
        Ok((self.bound(zero)?, self.bound(one)?))
    }

    /// Sums `edges` into one if they exceed the edge budget.
    fn bound(&self, edges: Vec<Edge>) -> Result<Vec<Edge>, InterpError> {
        let Some(first) = edges.first() else {
            return Ok(edges);
        };
        let dim = first.rho.dim();
        let limit = (self.cfg.edge_budget / (dim * dim)).max(1);
        if edges.len() <= limit {
            return Ok(edges);
        }
        let mut prefix = first.history.len();
        for e in &edges[1..] {
            prefix = prefix.min(
                first.history[..prefix]
                    .iter()
                    .zip(&e.history)
                    .take_while(|(a, b)| a == b)
                    .count(),
            );
        }
        let history = first.history[..prefix].to_vec();
        let mut sum = ComplexMatrix::zeros(dim)?;
        for e in &edges {
            sum = sum.try_add(e.rho.matrix())?;
        }
        Ok(vec![Edge {
            rho: DensityMatrix::new_unchecked(sum),
            history,
            coalesced: true,
        }])
    }

    /// Renames `flow`'s qubits from `from_env` ids to `to_env` ids by name and
    /// permutes its edges into `layout`.
    fn align(flow: Flow, from_env: &Env, to_env: &Env, layout: &[QubitId]) -> Result<Flow, InterpError> {
        let rename: BTreeMap<QubitId, QubitId> = from_env
            .iter()
            .map(|(name, &id)| (id, to_env[name]))
            .collect();
        let register: Vec<QubitId> = flow
            .register
            .iter()
            .map(|id| *rename.get(id).unwrap_or(id))
            .collect();
        let perm: Vec<usize> = register
            .iter()
            .map(|id| {
                layout
                    .iter()
                    .position(|q| q == id)
                    .expect("joined branches hold the same qubits")
            })
            .collect();
        let identity = perm.iter().enumerate().all(|(i, &p)| i == p);
        let edges = if identity {
            flow.edges
        } else {
            flow.edges
                .into_iter()
                .map(|e| {
                    Ok(Edge {
                        rho: permute_qubits(&e.rho, &perm)?,
                        history: e.history,
                        coalesced: e.coalesced,
                    })
                })
                .collect::<Result<_, DensError>>()?
        };
        Ok(Flow {
            register: layout.to_vec(),
            edges,
        })
    }

    fn block(&mut self, block: &Block, env: &mut Env, mut flow: Flow) -> Result<Flow, InterpError> {
        for stmt in &block.stmts {
            flow = self.stmt(&stmt.kind, env, flow)?;
            self.observe(&flow);
        }
        Ok(flow)
    }

    fn stmt(&mut self, kind: &StmtKind, env: &mut Env, mut flow: Flow) -> Result<Flow, InterpError> {
        match kind {
            StmtKind::NewQbit(q) => {
                if let Some(id) = self.input_ids.pop_front() {
                    env.insert(q.name.clone(), id);
                    return Ok(flow);
                }
                let cap = self.cfg.max_qubits;
                if flow.register.len() + 1 > cap {
                    return Err(InterpError::QubitCapExceeded { cap });
                }
                for e in &mut flow.edges {
                    e.rho = extend_with_fresh_qubit(&e.rho, cap)?;
                }
                let id = self.next_id;
                self.next_id += 1;
                flow.register.push(id);
                env.insert(q.name.clone(), id);
            }
            StmtKind::UnaryGate { target, gate } => {
                let targets = [Self::position(&flow, env, &target.name)];
                let g = &self.gates[gate];
                for e in &mut flow.edges {
                    apply_gate_in_place(e.rho.matrix_mut(), g, &targets)?;
                }
            }
            StmtKind::BinaryGate {
                first,
                second,
                gate,
            } => {
                let targets = [
                    Self::position(&flow, env, &first.name),
                    Self::position(&flow, env, &second.name),
                ];
                let g = &self.gates[gate];
                for e in &mut flow.edges {
                    apply_gate_in_place(e.rho.matrix_mut(), g, &targets)?;
                }
            }
            StmtKind::Measure { qubit, zero, one } => {
                let pos = Self::position(&flow, env, &qubit.name);
                let (e0, e1) = self.split(flow.edges, pos, &qubit.name, None)?;

                let parked = trace_sum(&e1);
                self.pending += parked;
                let mut env0 = env.clone();
                let start0 = Flow {
                    register: flow.register.clone(),
                    edges: e0,
                };
                let f0 = self.block(zero, &mut env0, start0)?;
                self.pending -= parked;

                let parked = trace_sum(&f0.edges);
                self.pending += parked;
                let mut env1 = env.clone();
                let start1 = Flow {
                    register: flow.register,
                    edges: e1,
                };
                let f1 = self.block(one, &mut env1, start1)?;
                self.pending -= parked;

                let mut f1 = Self::align(f1, &env1, &env0, &f0.register)?;
                let mut edges = f0.edges;
                edges.append(&mut f1.edges);
                *env = env0;
                flow = Flow {
                    register: f0.register,
                    edges: self.bound(edges)?,
                };
            }
            StmtKind::While { qubit, body } => {
                let layout = flow.register.clone();
                let mut exits: Vec<Edge> = Vec::new();
                let mut current = flow;
                for k in 0.. {
                    let pos = Self::position(&current, env, &qubit.name);
                    let (e0, e1) = self.split(current.edges, pos, &qubit.name, Some(k))?;
                    exits.extend(e0);
                    exits = self.bound(exits)?;
                    let inside = trace_sum(&e1);
                    if e1.is_empty() || inside < self.cfg.loop_tol || k >= self.cfg.max_iters {
                        self.residual += inside;
                        break;
                    }
                    let parked = trace_sum(&exits);
                    self.pending += parked;
                    let mut body_env = env.clone();
                    let start = Flow {
                        register: layout.clone(),
                        edges: e1,
                    };
                    let after = self.block(body, &mut body_env, start)?;
                    self.pending -= parked;
                    current = Self::align(after, &body_env, env, &layout)?;
                }
                flow = Flow {
                    register: layout,
                    edges: exits,
                };
            }
            StmtKind::Discard(q) => {
                let pos = Self::position(&flow, env, &q.name);
                for e in &mut flow.edges {
                    e.rho = partial_trace(&e.rho, pos)?;
                }
                flow.register.remove(pos.0);
                env.remove(&q.name);
            }
            StmtKind::Call { callee, args } => {
                let proc = self.program.proc(&callee.name);
                let mut callee_env: Env = proc
                    .params
                    .iter()
                    .zip(args)
                    .map(|(p, a)| (p.name.clone(), env[&a.name]))
                    .collect();
                flow = self.block(&proc.body, &mut callee_env, flow)?;
                for (p, a) in proc.params.iter().zip(args) {
                    env.insert(a.name.clone(), callee_env[&p.name]);
                }
            }
        }
        Ok(flow)
    }
}

/// Runs `main` exactly. See the module documentation for the semantics.
pub fn run_exact(program: &TypedProgram, cfg: &InterpConfig) -> Result<RunResult, InterpError> {
    run_exact_observed(program, cfg, &mut |_| {})
}

/// As [`run_exact`], reporting a [`Checkpoint`] after every executed
/// statement.
pub fn run_exact_observed(
    program: &TypedProgram,
    cfg: &InterpConfig,
    observer: &mut dyn FnMut(&Checkpoint),
) -> Result<RunResult, InterpError> {
    let main = program.main();
    let (initial_rho, input_qubits) = match &cfg.input_state {
        None => (DensityMatrix::empty_register(), 0),
        Some(rho) => {
            let k = rho.num_qubits();
            if k > cfg.max_qubits {
                return Err(InterpError::QubitCapExceeded {
                    cap: cfg.max_qubits,
                });
            }
            let leading_allocs = main
                .body
                .stmts
                .iter()
                .take_while(|s| matches!(s.kind, StmtKind::NewQbit(_)))
                .count();
            if leading_allocs < k {
                return Err(InterpError::InputState(format!(
                    "a {k}-qubit input needs `main` to start with {k} `new qbit` statements, found {leading_allocs}"
                )));
            }
            (rho.clone(), k)
        }
    };

    let initial = initial_rho.trace();
    let mut exec = Exec {
        program,
        cfg,
        next_id: input_qubits,
        input_ids: (0..input_qubits).collect(),
        pending: 0.0,
        residual: 0.0,
        pruned: 0.0,
        initial,
        gates: Gate::ALL.iter().map(|&g| (g, g.matrix())).collect(),
        observer,
    };
    let start = Flow {
        register: (0..input_qubits).collect(),
        edges: vec![Edge {
            rho: initial_rho,
            history: Vec::new(),
            coalesced: false,
        }],
    };
    let mut env = Env::new();
    let flow = exec.block(&main.body, &mut env, start)?;

    let names: BTreeMap<QubitId, &String> = env.iter().map(|(n, &id)| (id, n)).collect();
    let qubits: Vec<String> = flow.register.iter().map(|id| names[id].clone()).collect();

    let dim = 1usize << flow.register.len();
    let mut sum = ComplexMatrix::zeros(dim)?;
    let mut outcome_distribution = BTreeMap::new();
    for e in &flow.edges {
        sum = sum.try_add(e.rho.matrix())?;
        *outcome_distribution
            .entry(outcome_key(&e.history, e.coalesced))
            .or_insert(0.0) += e.rho.trace();
    }
    let branches = cfg.keep_branches.then(|| {
        flow.edges
            .iter()
            .map(|e| EdgeState {
                rho: e.rho.clone(),
                qubits: qubits.clone(),
                history: e.history.clone(),
                coalesced: e.coalesced,
            })
            .collect()
    });
    Ok(RunResult {
        merged: EdgeState {
            rho: DensityMatrix::new_unchecked(sum),
            qubits,
            history: Vec::new(),
            coalesced: false,
        },
        branches,
        outcome_distribution,
        loop_residual: exec.residual,
        pruned_trace: exec.pruned,
    })
}
