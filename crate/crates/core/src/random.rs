//! Seeded random generation of parameters, circuits, matrices and test pairs.
//!
//! Everything is driven by a ChaCha generator so that a `(seed, config)` pair
//! always yields the same objects.  Probabilities are rationals with bounded
//! denominators to keep exact arithmetic cheap.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::axioms::{apply_step, AxiomId, Direction, RewriteStep, Rule};
use crate::circuit::{flatten, gates, Circuit, Generator, Node};
use crate::rat::{complement, Rat};
use crate::semantics::SubStochMatrix;

/// Default bound on denominators of random probabilities.
pub const DEFAULT_MAX_DENOMINATOR: i64 = 64;

/// Shape constraints for random circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitConfig {
    /// Maximum number of wires at any cut of the layered construction.
    pub max_width: usize,
    /// Maximum number of generators other than identities and swaps.
    pub max_gens: usize,
    /// Whether `cond` may be used.
    pub cond: bool,
    /// Whether `flip` generators may be used (with arbitrary parameters);
    /// when false only the constants `flip(0)` and `flip(1)` appear.
    pub flips: bool,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        CircuitConfig {
            max_width: 4,
            max_gens: 15,
            cond: false,
            flips: true,
        }
    }
}

/// A seeded source of random test objects.
#[derive(Debug, Clone)]
pub struct Gen {
    rng: ChaCha8Rng,
    max_den: i64,
}

impl Gen {
    /// A generator with the default denominator bound.
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_den: DEFAULT_MAX_DENOMINATOR,
        }
    }

    /// Changes the denominator bound for random probabilities.
    pub fn with_max_denominator(mut self, max_den: i64) -> Gen {
        self.max_den = max_den.max(1);
        self
    }

    /// Direct access to the underlying generator.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A uniformly chosen integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    /// A fair coin.
    pub fn coin(&mut self) -> bool {
        self.rng.gen()
    }

    /// A random probability in `[0, 1]`; the endpoints are drawn with
    /// noticeable frequency so that degenerate cases get exercised.
    pub fn prob(&mut self) -> Rat {
        match self.rng.gen_range(0..10) {
            0 => Rat::zero(),
            1 => Rat::one(),
            _ => self.prob_open(),
        }
    }

    /// A random probability in the open interval `(0, 1)`.
    pub fn prob_open(&mut self) -> Rat {
        let d = self.rng.gen_range(2..=self.max_den.max(2));
        let n = self.rng.gen_range(1..d);
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    /// A random stochastic `m -> n` matrix with rational entries.
    pub fn stochastic(&mut self, m: usize, n: usize) -> SubStochMatrix {
        let rows = 1usize << n;
        let cols = 1usize << m;
        let mut entries = vec![Rat::zero(); rows * cols];
        for x in 0..cols {
            let column = self.distribution(rows);
            for (y, w) in column.into_iter().enumerate() {
                entries[y * cols + x] = w;
            }
        }
        SubStochMatrix::from_entries(m, n, entries).expect("stochastic by construction")
    }

    /// A random joint distribution over `n` bits (a stochastic `0 -> n` matrix).
    pub fn joint(&mut self, n: usize) -> SubStochMatrix {
        self.stochastic(0, n)
    }

    /// A random full-support distribution over `n` bits.
    pub fn full_support_joint(&mut self, n: usize) -> SubStochMatrix {
        let size = 1usize << n;
        let weights: Vec<i64> = (0..size).map(|_| self.rng.gen_range(1..=self.max_den)).collect();
        let total: i64 = weights.iter().sum();
        let entries = weights
            .into_iter()
            .map(|w| Rat::new(BigInt::from(w), BigInt::from(total)))
            .collect();
        SubStochMatrix::from_entries(0, n, entries).expect("stochastic by construction")
    }

    fn distribution(&mut self, size: usize) -> Vec<Rat> {
        // Sparse supports are common in circuit semantics, so zero out
        // entries fairly often.
        let mut weights: Vec<i64> = (0..size)
            .map(|_| {
                if self.rng.gen_range(0..3) == 0 {
                    0
                } else {
                    self.rng.gen_range(1..=self.max_den)
                }
            })
            .collect();
        if weights.iter().all(|&w| w == 0) {
            let i = self.rng.gen_range(0..size);
            weights[i] = 1;
        }
        let total: i64 = weights.iter().sum();
        weights
            .into_iter()
            .map(|w| Rat::new(BigInt::from(w), BigInt::from(total)))
            .collect()
    }

    /// A random layered circuit with the given number of inputs.  Layers are
    /// combined with a random association of `seq`, and the elements of each
    /// layer with a random association of `par`.
    pub fn circuit(&mut self, inputs: usize, config: &CircuitConfig) -> Circuit {
        let budget = self.rng.gen_range(1..=config.max_gens.max(1));
        let mut gens = 0;
        let mut width = inputs;
        let mut layers = Vec::new();
        let mut attempts = 0;
        while gens < budget && attempts < 4 * budget + 8 {
            attempts += 1;
            let (layer, used, new_width) = self.layer(width, budget - gens, config);
            if used == 0 {
                continue;
            }
            gens += used;
            width = new_width;
            layers.push(layer);
        }
        if layers.is_empty() {
            return gates::id_n(inputs);
        }
        self.associate(layers, true)
    }

    /// A random circuit whose input count is itself random (up to the width).
    pub fn any_circuit(&mut self, config: &CircuitConfig) -> Circuit {
        let inputs = self.rng.gen_range(0..=config.max_width);
        self.circuit(inputs, config)
    }

    /// A random Boolean circuit (no random flips, no conditioning).
    pub fn boolean_circuit(&mut self, inputs: usize, max_width: usize, max_gens: usize) -> Circuit {
        let config = CircuitConfig {
            max_width,
            max_gens,
            cond: false,
            flips: false,
        };
        self.circuit(inputs, &config)
    }

    /// One layer acting on `width` wires: returns the layer, the number of
    /// generators used and the output width.
    fn layer(&mut self, width: usize, budget: usize, config: &CircuitConfig) -> (Circuit, usize, usize) {
        let mut elems = Vec::new();
        let mut used = 0;
        let mut out_width = width;
        let mut i = 0;
        // Optionally start the layer with a fresh source.
        if out_width < config.max_width && used < budget && (width == 0 || self.rng.gen_range(0..5) == 0) {
            elems.push(self.source(config));
            used += 1;
            out_width += 1;
        }
        while i < width {
            let remaining = width - i;
            let mut options: Vec<u8> = vec![0, 0, 0];
            if used < budget {
                options.extend([1, 3]);
                if out_width < config.max_width {
                    options.push(2);
                }
                if remaining >= 2 {
                    options.extend([4, 4]);
                    if config.cond {
                        options.extend([6, 6]);
                    }
                }
            }
            if remaining >= 2 {
                options.push(5);
            }
            let choice = *options.choose(&mut self.rng).expect("non-empty");
            let (elem, consumed, produced, gen) = match choice {
                1 => (Circuit::not(), 1, 1, 1),
                2 => (Circuit::copy(), 1, 2, 1),
                3 => (Circuit::discard(), 1, 0, 1),
                4 => (Circuit::and(), 2, 1, 1),
                5 => (Circuit::swap(), 2, 2, 0),
                6 => (Circuit::cond(), 2, 1, 1),
                _ => (Circuit::id(), 1, 1, 0),
            };
            elems.push(elem);
            used += gen;
            out_width = out_width + produced - consumed;
            i += consumed;
        }
        let layer = self.associate(elems, false);
        (layer, used, out_width)
    }

    fn source(&mut self, config: &CircuitConfig) -> Circuit {
        let p = if config.flips { self.prob() } else { Rat::from_integer(BigInt::from(u8::from(self.coin()))) };
        Circuit::flip(p).expect("probability by construction")
    }

    fn associate(&mut self, mut items: Vec<Circuit>, sequential: bool) -> Circuit {
        if items.len() == 1 {
            return items.pop().expect("one item");
        }
        let k = self.rng.gen_range(1..items.len());
        let right = items.split_off(k);
        let a = self.associate(items, sequential);
        let b = self.associate(right, sequential);
        if sequential {
            Circuit::seq(a, b).expect("layers agree by construction")
        } else {
            Circuit::par(a, b)
        }
    }

    /// A random circuit that fails everywhere: a random circuit in parallel
    /// with a contradictory observation, followed by a random circuit.
    pub fn failing_circuit(&mut self, inputs: usize, config: &CircuitConfig) -> Circuit {
        let front = self.circuit(inputs, config);
        let back = self.circuit(front.outputs(), config);
        let bot = gates::flip_bot();
        let wide = Circuit::par(front, bot);
        let tail = Circuit::par(back, Circuit::discard());
        Circuit::seq(wide, tail).expect("well typed")
    }

    /// Rewrites `c` with one to three semantics-preserving axiom steps applied
    /// right to left at random locations (introducing `not;not`, `copy;and`,
    /// `copy;(id⊗del)` on wires and splitting flips with E1).
    pub fn engineered_equal(&mut self, c: &Circuit) -> Circuit {
        let mut cur = flatten(c);
        let steps = self.rng.gen_range(1..=3);
        for _ in 0..steps {
            let sites = rewrite_sites(&cur);
            if sites.is_empty() {
                break;
            }
            let (path, kind) = sites.choose(&mut self.rng).expect("non-empty").clone();
            let step = match kind {
                Site::Flip(p) => RewriteStep::new(Rule::Axiom(AxiomId::E1), Direction::RightToLeft, path)
                    .with_param("p", complement(&p)),
                Site::Wire => {
                    let rule = *[AxiomId::B4, AxiomId::B5, AxiomId::A2r, AxiomId::A2l]
                        .choose(&mut self.rng)
                        .expect("non-empty");
                    RewriteStep::new(Rule::Axiom(rule), Direction::RightToLeft, path)
                }
            };
            cur = apply_step(&cur, &step).expect("introduction rules always apply at these sites");
        }
        if cur == flatten(c) {
            // No rewrite site: post-compose the outputs with `not;not`.
            let nn = Circuit::seq(Circuit::not(), Circuit::not()).expect("well typed");
            let tail = Circuit::par_all(vec![nn; c.outputs()]);
            cur = flatten(&Circuit::seq(c.clone(), tail).expect("well typed"));
        }
        cur
    }

    /// A perturbation of `c`: one flip parameter changed, or one output
    /// negated.  The result may or may not be semantically different; callers
    /// decide with an oracle.
    pub fn perturbed(&mut self, c: &Circuit) -> Circuit {
        let flips = flip_paths(&flatten(c));
        if !flips.is_empty() && self.coin() {
            let (path, p) = flips.choose(&mut self.rng).expect("non-empty").clone();
            let mut q = self.prob();
            while q == p {
                q = self.prob();
            }
            let f = flatten(c);
            return f.replace(&path, Circuit::flip(q).expect("probability")).expect("valid path");
        }
        if c.outputs() == 0 {
            // Nothing observable to negate; change the scalar instead.
            let scalar = Circuit::seq(gates::flip_bot(), Circuit::discard()).expect("one output");
            return Circuit::par(c.clone(), scalar);
        }
        let k = self.rng.gen_range(0..c.outputs());
        let mut tail = vec![Circuit::id(); c.outputs()];
        tail[k] = Circuit::not();
        Circuit::seq(c.clone(), Circuit::par_all(tail)).expect("well typed")
    }
}

#[derive(Debug, Clone)]
enum Site {
    Flip(Rat),
    Wire,
}

fn rewrite_sites(c: &Circuit) -> Vec<(Vec<usize>, Site)> {
    fn go(c: &Circuit, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Site)>) {
        match c.node() {
            Node::Gen(Generator::Flip(p)) => out.push((path.clone(), Site::Flip(p.clone()))),
            Node::Id => out.push((path.clone(), Site::Wire)),
            Node::Seq(a, b) | Node::Par(a, b) => {
                path.push(0);
                go(a, path, out);
                path.pop();
                path.push(1);
                go(b, path, out);
                path.pop();
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(c, &mut Vec::new(), &mut out);
    out
}

fn flip_paths(c: &Circuit) -> Vec<(Vec<usize>, Rat)> {
    rewrite_sites(c)
        .into_iter()
        .filter_map(|(path, site)| match site {
            Site::Flip(p) => Some((path, p)),
            Site::Wire => None,
        })
        .collect()
}
