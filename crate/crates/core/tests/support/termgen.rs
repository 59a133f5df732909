//! Random terms over the default operator table, for differential and
//! round-trip tests. Deterministic for a given RNG.

use pldev_core::term::TermKind;
use pldev_core::{OperatorTable, Term};
use rand::seq::SliceRandom;
use rand::Rng;

const ATOMS: &[&str] = &[
    "a", "foo", "bar_1", "hello world", "[]", "{}", "A", "it's", "+", "-", "*", "=", "is", "mod", "dynamic", ":-",
    ",", "\\", "\n", "élan", "x\\y",
];
const VARS: &[&str] = &["X", "Y", "Zed", "_A", "_"];
const FUNCTORS: &[&str] = &["f", "g", "point", "Quoted F", "-", "+", "[]", "{}", "mod"];
const INTS: &[i64] = &[0, 1, 7, 42, 100, -1, -3, 123_456_789_012];
const FLOATS: &[f64] = &[1.5, -2.25, 0.1, 1.0e10, 3.0, 2.5e-5];

pub struct TermGen {
    /// `(name, arity)` of every operator form in the table.
    ops: Vec<(String, usize)>,
    next_var: usize,
}

impl TermGen {
    pub fn new(table: &OperatorTable) -> Self {
        let mut ops: Vec<(String, usize)> = table.iter().map(|d| (d.name.clone(), d.arity())).collect();
        ops.push((",".into(), 2));
        TermGen { ops, next_var: 0 }
    }

    /// A term of depth at most `depth` (a leaf has depth 1).
    pub fn term(&mut self, rng: &mut impl Rng, depth: u32) -> Term {
        if depth <= 1 || rng.gen_bool(0.3) {
            return self.leaf(rng);
        }
        match rng.gen_range(0..10) {
            0..=3 => {
                let (name, arity) = self.ops.choose(rng).expect("operators").clone();
                let args = (0..arity).map(|_| self.term(rng, depth - 1)).collect();
                Term::compound(name, args)
            }
            4..=5 => {
                let name = *FUNCTORS.choose(rng).expect("functors");
                let n = rng.gen_range(1..=3);
                let args = (0..n).map(|_| self.term(rng, depth - 1)).collect();
                Term::compound(name, args)
            }
            6..=7 => {
                let n = rng.gen_range(1..=3);
                let items = (0..n).map(|_| self.term(rng, depth - 1)).collect();
                let tail = rng.gen_bool(0.3).then(|| self.leaf(rng));
                Term::list(items, tail)
            }
            8 => Term::new(TermKind::Curly(Box::new(self.term(rng, depth - 1))), Default::default()),
            _ => {
                // Sign operators applied to numbers: `- 1` is not `-1`.
                let sign = if rng.gen_bool(0.5) { "-" } else { "+" };
                let n = if rng.gen_bool(0.5) { Term::int(*INTS.choose(rng).unwrap()) } else { self.float(rng) };
                Term::compound(sign, vec![n])
            }
        }
    }

    fn float(&self, rng: &mut impl Rng) -> Term {
        Term::new(TermKind::Float(*FLOATS.choose(rng).unwrap()), Default::default())
    }

    fn leaf(&mut self, rng: &mut impl Rng) -> Term {
        match rng.gen_range(0..4) {
            0 => Term::atom(*ATOMS.choose(rng).unwrap()),
            1 => {
                self.next_var += 1;
                Term::var(*VARS.choose(rng).unwrap(), self.next_var)
            }
            2 => Term::int(*INTS.choose(rng).unwrap()),
            _ => self.float(rng),
        }
    }
}
