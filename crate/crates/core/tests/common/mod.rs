//! Random well-typed program generator shared by the property suites.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNARY: [&str; 4] = ["N", "H", "V", "W"];
const BINARY: [&str; 5] = ["Nc", "Hc", "Vc", "Wc", "X"];
const MAX_LIVE: usize = 6;

pub struct Gen {
    rng: ChaCha8Rng,
    temps: usize,
    /// (name, arity) of procedures generated so far.
    procs: Vec<(String, usize)>,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            temps: 0,
            procs: Vec::new(),
        }
    }

    fn pick<'a>(&mut self, live: &'a [String]) -> &'a str {
        live.choose(&mut self.rng).unwrap()
    }

    fn pick_two(&mut self, live: &[String]) -> (String, String) {
        let mut v: Vec<&String> = live.choose_multiple(&mut self.rng, 2).collect();
        v.shuffle(&mut self.rng);
        (v[0].clone(), v[1].clone())
    }

    fn gate_stmt(&mut self, live: &[String], out: &mut String) {
        if live.len() >= 2 && self.rng.gen_bool(0.4) {
            let (a, b) = self.pick_two(live);
            let g = BINARY.choose(&mut self.rng).unwrap();
            out.push_str(&format!("{a}, {b} *= {g};\n"));
        } else {
            let q = self.pick(live).to_string();
            let g = UNARY.choose(&mut self.rng).unwrap();
            out.push_str(&format!("{q} *= {g};\n"));
        }
    }

    /// A block that leaves `live` exactly as it found it.
    pub fn balanced(&mut self, live: &mut Vec<String>, depth: usize, out: &mut String) {
        let n = self.rng.gen_range(1..=4);
        for _ in 0..n {
            let choice = self.rng.gen_range(0..10);
            match choice {
                0..=3 => self.gate_stmt(live, out),
                4 if depth > 0 => {
                    let q = self.pick(live).to_string();
                    out.push_str(&format!("measure {q} {{\n0: {{\n"));
                    self.balanced(live, depth - 1, out);
                    out.push_str("}\n1: {\n");
                    self.balanced(live, depth - 1, out);
                    out.push_str("}\n}\n");
                }
                5 if depth > 0 => {
                    let q = self.pick(live).to_string();
                    out.push_str(&format!("while {q} {{\n{q} *= H;\n"));
                    self.balanced(live, depth - 1, out);
                    out.push_str("}\n");
                }
                6 if depth > 0 && live.len() < MAX_LIVE => {
                    let t = format!("t{}", self.temps);
                    self.temps += 1;
                    out.push_str(&format!("new qbit {t};\n"));
                    live.push(t.clone());
                    self.balanced(live, depth - 1, out);
                    live.retain(|x| *x != t);
                    out.push_str(&format!("discard {t};\n"));
                }
                7 => {
                    let q = self.pick(live).to_string();
                    out.push_str(&format!("discard {q};\nnew qbit {q};\n"));
                    // Re-allocation moves q to the end of the register.
                    live.retain(|x| *x != q);
                    live.push(q);
                }
                8 if !self.procs.is_empty() => {
                    let (name, arity) = self.procs.choose(&mut self.rng).unwrap().clone();
                    if arity <= live.len() {
                        let args: Vec<&String> = live.choose_multiple(&mut self.rng, arity).collect();
                        let args: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
                        out.push_str(&format!("call {name}({});\n", args.join(", ")));
                    } else {
                        self.gate_stmt(live, out);
                    }
                }
                _ => self.gate_stmt(live, out),
            }
        }
    }

    fn procedure(&mut self) -> String {
        let arity = self.rng.gen_range(1..=2);
        let name = format!("f{}", self.procs.len());
        let mut live: Vec<String> = (0..arity).map(|i| format!("a{i}")).collect();
        let mut body = String::new();
        self.balanced(&mut live, 1, &mut body);
        let params: Vec<String> = (0..arity).map(|i| format!("a{i}: qbit")).collect();
        self.procs.push((name.clone(), arity));
        format!("proc {name}({}) {{\n{body}}}\n\n", params.join(", "))
    }

    /// Procedures plus an opening for `main`; returns (source so far, live set).
    pub fn prefix(&mut self) -> (String, Vec<String>) {
        let mut src = String::new();
        for _ in 0..self.rng.gen_range(0..=2) {
            src.push_str(&self.procedure());
        }
        src.push_str("proc main() {\n");
        let k = self.rng.gen_range(1..=3);
        let live: Vec<String> = (0..k).map(|i| format!("q{i}")).collect();
        for q in &live {
            src.push_str(&format!("new qbit {q};\n"));
        }
        (src, live)
    }

    /// A complete program and the names live at the end of `main`, in
    /// allocation order.
    pub fn program(&mut self) -> (String, Vec<String>) {
        let (mut src, mut live) = self.prefix();
        let mut next = live.len();
        for _ in 0..self.rng.gen_range(1..=4) {
            match self.rng.gen_range(0..6) {
                0 if live.len() < MAX_LIVE => {
                    let q = format!("q{next}");
                    next += 1;
                    src.push_str(&format!("new qbit {q};\n"));
                    live.push(q);
                }
                1 if live.len() > 1 => {
                    let q = self.pick(&live).to_string();
                    src.push_str(&format!("discard {q};\n"));
                    live.retain(|x| *x != q);
                }
                _ => self.balanced(&mut live, 2, &mut src),
            }
        }
        src.push_str("}\n");
        (src, live)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
