//! Brute-force minimal causes.
//!
//! A set of trace assignments to root inputs and constants is a cause of a
//! target when the target value follows from it by repeated single-constraint
//! inference: a connection copies a known value, a DELAY carries the known
//! source of the previous step (or its known default at step 1), and a block
//! output is known once every completion of its unknown inputs over their
//! domains yields the actual output. Completions on which the block function
//! is undefined are ignored. Minimal causes are found by enumerating subsets
//! of the candidates in order of size.

use std::collections::{BTreeSet, HashSet};

use cx_core::ir::{flatten, Assignment, BasicOp, Diagram, Driver, FlatBlock, FlatNet, GateId};
use cx_core::{ExtendedTrace, Value};

pub struct CauseOracle<'a> {
    d: &'a Diagram,
    net: FlatNet,
    ext: &'a ExtendedTrace,
}

impl<'a> CauseOracle<'a> {
    pub fn new(d: &'a Diagram, ext: &'a ExtendedTrace) -> Self {
        CauseOracle {
            d,
            net: flatten(d),
            ext,
        }
    }

    fn assignment(&self, g: GateId, step: usize) -> Assignment {
        Assignment {
            gate: g,
            value: self.ext.value(g, step),
            step,
        }
    }

    /// Input and constant assignments the target can depend on.
    pub fn candidates(&self, gate: GateId, step: usize) -> Vec<Assignment> {
        let mut seen = HashSet::new();
        let mut stack = vec![(gate, step)];
        let mut out = BTreeSet::new();
        while let Some((g, s)) = stack.pop() {
            if !seen.insert((g, s)) {
                continue;
            }
            match self.net.driver(g) {
                Driver::Free | Driver::Const(_) => {
                    out.insert(self.assignment(g, s));
                }
                Driver::Wire { from, .. } => stack.push((from, s)),
                Driver::Block(i) => {
                    let b = &self.net.blocks[i];
                    if b.op == BasicOp::Delay {
                        if s == 1 {
                            stack.push((b.inputs[0], 1));
                        } else {
                            stack.push((b.inputs[1], s - 1));
                        }
                    } else {
                        stack.extend(b.inputs.iter().map(|x| (*x, s)));
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Whether the target value is inferred from `given`.
    pub fn derives(&self, given: &HashSet<(GateId, usize)>, gate: GateId, step: usize) -> bool {
        let mut memo = vec![vec![None; self.net.gate_count()]; step];
        self.known(given, gate, step, &mut memo)
    }

    fn known(
        &self,
        given: &HashSet<(GateId, usize)>,
        g: GateId,
        s: usize,
        memo: &mut [Vec<Option<bool>>],
    ) -> bool {
        if let Some(k) = memo[s - 1][g.0] {
            return k;
        }
        let k = match self.net.driver(g) {
            Driver::Free | Driver::Const(_) => given.contains(&(g, s)),
            Driver::Wire { from, .. } => self.known(given, from, s, memo),
            Driver::Block(i) => {
                let b = &self.net.blocks[i];
                if b.op == BasicOp::Delay {
                    if s == 1 {
                        self.known(given, b.inputs[0], 1, memo)
                    } else {
                        self.known(given, b.inputs[1], s - 1, memo)
                    }
                } else {
                    self.determined(given, b, s, memo)
                }
            }
        };
        memo[s - 1][g.0] = Some(k);
        k
    }

    fn determined(
        &self,
        given: &HashSet<(GateId, usize)>,
        b: &FlatBlock,
        s: usize,
        memo: &mut [Vec<Option<bool>>],
    ) -> bool {
        let actual = self.ext.value(b.output, s);
        let fixed: Vec<Option<Value>> = b
            .inputs
            .iter()
            .map(|g| self.known(given, *g, s, memo).then(|| self.ext.value(*g, s)))
            .collect();
        let domains: Vec<Vec<Value>> = b
            .inputs
            .iter()
            .zip(&fixed)
            .map(|(g, f)| match f {
                Some(v) => vec![*v],
                None => self.d.gate(*g).kind.domain().collect(),
            })
            .collect();
        let mut idx = vec![0usize; domains.len()];
        loop {
            let args: Vec<Value> = idx.iter().zip(&domains).map(|(i, d)| d[*i]).collect();
            if let Ok(v) = b.op.apply(&args) {
                if v != actual {
                    return false;
                }
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return true;
                }
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// All minimal causes, or `None` when the candidate set exceeds `bound`.
    pub fn minimal_causes(&self, gate: GateId, step: usize, bound: usize) -> Option<Vec<Vec<Assignment>>> {
        let cands = self.candidates(gate, step);
        let n = cands.len();
        if n > bound {
            return None;
        }
        let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
        masks.sort_by_key(|m| m.count_ones());
        let mut found: Vec<u32> = Vec::new();
        for m in masks {
            if found.iter().any(|f| f & m == *f) {
                continue;
            }
            let given: HashSet<(GateId, usize)> = (0..n)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| (cands[i].gate, cands[i].step))
                .collect();
            if self.derives(&given, gate, step) {
                found.push(m);
            }
        }
        Some(
            found
                .into_iter()
                .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| cands[i]).collect())
                .collect(),
        )
    }

    /// Union of all minimal causes.
    pub fn cause_union(&self, gate: GateId, step: usize, bound: usize) -> Option<BTreeSet<Assignment>> {
        self.minimal_causes(gate, step, bound)
            .map(|cs| cs.into_iter().flatten().collect())
    }
}
