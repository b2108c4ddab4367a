//! The f-invariant entropy routes.
//!
//! With `B_n` the radius-`n` ball, `S` the free generators and `r = |S|`:
//!
//! * ball limit: `F(n) = (1-2r) H(B_n) + Σ_{s∈S} H(B_n ∪ sB_n)`, non-increasing in `n`;
//! * sphere formula: `F'(n) = (1-r) H(B_n) + ½ H(B_{n+1} / B_n)`;
//! * decay series: `H(α) - ½ Σ_{1≠g∈B_R} δ(g)` where
//!   `δ(g) = c(s⁻¹g) - c(g)`, `c(g) = H(g / Pre(g))` and `s` is the first letter of `g`.
//!
//! All entropies are of the canonical partition pulled back along the set,
//! optionally relative to the finite invariant partition of a direct sum.

use std::fmt;

use crate::engine::{Conditioning, EntropyEngine, Strategy};
use crate::error::{Error, Result};
use crate::numeric::{entropy_of_weights, EntropyValue, NumericMode, Weight, AUTO_RATIONAL_LIMIT};
pub use crate::numeric::Value;
use crate::systems::{System, SystemSpec};
use crate::word::{Letter, OrderedBall, Word};
use crate::ComputeOptions;

/// Which formula produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    BallLimit,
    SphereFormula,
    DecaySeries,
    AtomicClosedForm,
    DirectSum,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::BallLimit => "ball-limit",
            Route::SphereFormula => "sphere-formula",
            Route::DecaySeries => "decay-series",
            Route::AtomicClosedForm => "atomic-closed-form",
            Route::DirectSum => "direct-sum",
        })
    }
}

/// One row of a trace: a radius or group element, its term, and the running value.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub key: String,
    pub term: Value,
    pub cumulative: Value,
}

/// Result of one route at one truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    pub route: Route,
    pub value: Value,
    /// Whether the truncation provably equals the limit.
    pub exact: bool,
    pub truncation: String,
    pub trace: Vec<TraceRow>,
    /// For the decay series: half the δ-mass on the outermost sphere, a
    /// heuristic indicator of the remaining tail.
    pub tail: Option<f64>,
}

/// `(n, H(B_{n+1} / B_n), its n-th root, ratio to the previous increment)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub n: usize,
    pub increment: Value,
    pub root: Option<f64>,
    pub ratio: Option<f64>,
}

/// Both sides of the cyclic-subgroup formula at one truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct RformulaCheck {
    pub left: Value,
    /// Exact value when every cyclic term stabilized.
    pub right: Option<Value>,
    /// Enclosure `[lo, hi]` of the right side when some term did not stabilize.
    pub right_interval: (f64, f64),
    /// Per generator: the last truncated term and the depth reached.
    pub terms: Vec<(Letter, Value, usize, bool)>,
}

/// Both sides of the ergodic-decomposition identity.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectSumReport {
    pub components: Vec<Value>,
    pub weights_entropy: Value,
    /// `Σ p_i f_i - (r-1) H(τ)`.
    pub formula: Value,
    /// The ball route on the whole system by pattern enumeration.
    pub direct: Value,
    /// The ball route relative to the component partition.
    pub relative: Value,
    /// `Σ p_i f_i`, which `relative` must equal.
    pub relative_expected: Value,
    pub exact: bool,
    pub radius: usize,
}

/// Tolerance for deciding that a cyclic term has stabilized.
pub const STABILIZATION_TOL: f64 = 1e-12;

pub struct FEntropy<'a> {
    engine: EntropyEngine<'a>,
}

impl<'a> FEntropy<'a> {
    pub fn new(system: &'a System, options: ComputeOptions) -> Result<Self> {
        Ok(FEntropy {
            engine: EntropyEngine::new(system, options),
        })
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.engine = self.engine.with_strategy(strategy);
        self
    }

    pub fn engine(&self) -> &EntropyEngine<'a> {
        &self.engine
    }

    fn system(&self) -> &System {
        self.engine.system()
    }

    fn rank(&self) -> usize {
        self.system().rank
    }

    fn ball(&self, radius: usize) -> Result<OrderedBall> {
        let o = self.engine.options();
        OrderedBall::new(self.rank(), radius, &o.order, o.ball_cap)
    }

    fn h<W: Weight>(&self, set: &[Word], cond: Conditioning) -> Result<W::Entropy> {
        self.engine.entropy::<W>(set, cond)
    }

    /// `H(α / Σ)`.
    pub fn base_entropy<W: Weight>(&self, cond: Conditioning) -> Result<W::Entropy> {
        self.h::<W>(&[Word::identity()], cond)
    }

    /// Ball-limit functional at radius `n`.
    pub fn f_ball<W: Weight>(&self, n: usize, cond: Conditioning) -> Result<W::Entropy> {
        let ball = self.ball(n)?;
        let bn = ball.elements();
        let r = self.rank() as i64;
        let mut total = self.h::<W>(bn, cond)?.scale(1 - 2 * r, 1);
        for s in Letter::generators(self.rank()) {
            let mut set: Vec<Word> = bn.to_vec();
            set.extend(bn.iter().map(|g| g.left_mul(s)));
            total = total.add(&self.h::<W>(&set, cond)?);
        }
        Ok(total)
    }

    /// Sphere formula at radius `n`.
    pub fn f_sphere<W: Weight>(&self, n: usize, cond: Conditioning) -> Result<W::Entropy> {
        let ball = self.ball(n + 1)?;
        let hn = self.h::<W>(ball.ball(n), cond)?;
        let hn1 = self.h::<W>(ball.elements(), cond)?;
        let r = self.rank() as i64;
        Ok(hn.scale(1 - r, 1).add(&hn1.sub(&hn).scale(1, 2)))
    }

    /// `H(g / Pre(g))` under the configured order.
    pub fn conditional_increment<W: Weight>(&self, g: &Word, cond: Conditioning) -> Result<W::Entropy> {
        let ball = self.ball(g.len())?;
        let pos = ball.position(g).expect("element of its own ball");
        let upto = &ball.elements()[..=pos];
        let pre = &ball.elements()[..pos];
        Ok(self.h::<W>(upto, cond)?.sub(&self.h::<W>(pre, cond)?))
    }

    /// Independence decay at `g ≠ 1`.
    pub fn delta<W: Weight>(&self, g: &Word, cond: Conditioning) -> Result<W::Entropy> {
        let (_, p) = g.parent()?;
        Ok(self
            .conditional_increment::<W>(&p, cond)?
            .sub(&self.conditional_increment::<W>(g, cond)?))
    }

    /// `H(g / Pre(g))` for every `g` in `B_R`, in order.
    pub fn conditional_increments<W: Weight>(&self, radius: usize, cond: Conditioning) -> Result<Vec<(Word, W::Entropy)>> {
        let ball = self.ball(radius)?;
        let els = ball.elements();
        let mut prev = W::Entropy::zero();
        let mut out = Vec::with_capacity(els.len());
        for k in 0..els.len() {
            let cur = self.h::<W>(&els[..=k], cond)?;
            out.push((els[k].clone(), cur.sub(&prev)));
            prev = cur;
        }
        Ok(out)
    }

    /// `δ(g)` for every `1 ≠ g ∈ B_R`, in order.
    pub fn decay_profile<W: Weight>(&self, radius: usize, cond: Conditioning) -> Result<Vec<(Word, W::Entropy)>> {
        let incs = self.conditional_increments::<W>(radius, cond)?;
        let c_of = |w: &Word| {
            incs.iter()
                .find(|(g, _)| g == w)
                .map(|(_, c)| c.clone())
                .expect("parent lies in the ball")
        };
        Ok(incs
            .iter()
            .skip(1)
            .map(|(g, c)| {
                let (_, p) = g.parent().expect("non-identity");
                (g.clone(), c_of(&p).sub(c))
            })
            .collect())
    }

    fn exact_ball_route(&self) -> bool {
        exact_structure(&self.system().spec)
    }

    /// Decay-series value truncated to `B_R`.
    pub fn f_decay<W: Weight>(&self, radius: usize, cond: Conditioning) -> Result<EntropyReport> {
        if radius == 0 {
            return Err(Error::Unsupported("the decay series needs radius at least 1".into()));
        }
        let h0 = self.base_entropy::<W>(cond)?;
        let deltas = self.decay_profile::<W>(radius, cond)?;
        let mut cum = h0.clone();
        let mut trace = vec![TraceRow {
            key: "e".into(),
            term: h0.clone().into_value(),
            cumulative: h0.clone().into_value(),
        }];
        let mut tail = W::Entropy::zero();
        for (g, d) in &deltas {
            let half = d.scale(1, 2);
            cum = cum.sub(&half);
            if g.len() == radius {
                tail = tail.add(&half);
            }
            trace.push(TraceRow {
                key: g.to_string(),
                term: d.clone().into_value(),
                cumulative: cum.clone().into_value(),
            });
        }
        Ok(EntropyReport {
            route: Route::DecaySeries,
            value: cum.into_value(),
            exact: self.exact_ball_route(),
            truncation: format!("R={radius}"),
            trace,
            tail: Some(tail.to_f64()),
        })
    }

    /// Ball-limit values for `n = 0..=radius`.
    pub fn ball_report<W: Weight>(&self, radius: usize, cond: Conditioning) -> Result<EntropyReport> {
        let mut trace = Vec::new();
        let mut last = W::Entropy::zero();
        for n in 0..=radius {
            last = self.f_ball::<W>(n, cond)?;
            trace.push(TraceRow {
                key: n.to_string(),
                term: last.clone().into_value(),
                cumulative: last.clone().into_value(),
            });
        }
        Ok(EntropyReport {
            route: Route::BallLimit,
            value: last.into_value(),
            exact: self.exact_ball_route(),
            truncation: format!("n={radius}"),
            trace,
            tail: None,
        })
    }

    /// Sphere-formula values for `n = 0..=radius`.
    pub fn sphere_report<W: Weight>(&self, radius: usize, cond: Conditioning) -> Result<EntropyReport> {
        let mut trace = Vec::new();
        let mut last = W::Entropy::zero();
        for n in 0..=radius {
            last = self.f_sphere::<W>(n, cond)?;
            trace.push(TraceRow {
                key: n.to_string(),
                term: last.clone().into_value(),
                cumulative: last.clone().into_value(),
            });
        }
        Ok(EntropyReport {
            route: Route::SphereFormula,
            value: last.into_value(),
            exact: self.exact_ball_route(),
            truncation: format!("n={radius}"),
            trace,
            tail: None,
        })
    }

    /// `-(r-1) H(μ)` for a finite action.
    pub fn f_atomic<W: Weight>(&self) -> Result<EntropyReport> {
        let SystemSpec::FiniteAction(fa) = &self.system().spec else {
            return Err(Error::Unsupported("the atomic closed form needs a finite action".into()));
        };
        let h = entropy_of_weights(&fa.mass.weights::<W>());
        let r = self.rank() as i64;
        let v = h.scale(1 - r, 1);
        Ok(EntropyReport {
            route: Route::AtomicClosedForm,
            value: v.clone().into_value(),
            exact: true,
            truncation: "none".into(),
            trace: vec![TraceRow {
                key: "H(mu)".into(),
                term: h.into_value(),
                cumulative: v.into_value(),
            }],
            tail: None,
        })
    }

    /// Both sides of the ergodic-decomposition identity at ball radius `n`.
    pub fn f_direct_sum<W: Weight>(&self, n: usize) -> Result<DirectSumReport> {
        let SystemSpec::DirectSum(d) = &self.system().spec else {
            return Err(Error::Unsupported("decomposition needs a direct-sum system".into()));
        };
        let rank = self.rank();
        let opts = self.engine.options().clone();
        let mut comps = Vec::new();
        let mut weighted = W::Entropy::zero();
        for (w, c) in d.weights.iter().zip(&d.components) {
            let sys = System::unchecked(rank, c.clone());
            let fe = FEntropy::new(&sys, opts.clone())?;
            let f = match c {
                SystemSpec::FiniteAction(fa) if fa.partition.is_none() => {
                    entropy_of_weights(&fa.mass.weights::<W>()).scale(1 - rank as i64, 1)
                }
                _ => fe.f_ball::<W>(n, Conditioning::Trivial)?,
            };
            weighted = weighted.add(&W::from_rational(w).weigh(&f));
            comps.push(f.into_value());
        }
        let tau: Vec<W> = d.weights.iter().map(W::from_rational).collect();
        let h_tau = entropy_of_weights(&tau);
        let formula = weighted.sub(&h_tau.scale(rank as i64 - 1, 1));
        let direct = FEntropy {
            engine: self.engine.clone().with_strategy(Strategy::Enumerate),
        }
        .f_ball::<W>(n, Conditioning::Trivial)?;
        let relative = self.f_ball::<W>(n, Conditioning::Components)?;
        Ok(DirectSumReport {
            components: comps,
            weights_entropy: h_tau.into_value(),
            formula: formula.into_value(),
            direct: direct.into_value(),
            relative: relative.into_value(),
            relative_expected: weighted.into_value(),
            exact: self.exact_ball_route(),
            radius: n,
        })
    }

    /// Growth diagnostic for `n = 0..radius`.
    pub fn growth_profile<W: Weight>(&self, radius: usize, cond: Conditioning) -> Result<Vec<GrowthRow>> {
        let ball = self.ball(radius + 1)?;
        let mut rows = Vec::new();
        let mut prev_h = self.h::<W>(ball.ball(0), cond)?;
        let mut prev_inc: Option<f64> = None;
        for n in 0..=radius {
            let h = self.h::<W>(ball.ball(n + 1), cond)?;
            let inc = h.sub(&prev_h);
            let x = inc.to_f64();
            rows.push(GrowthRow {
                n,
                increment: inc.into_value(),
                root: (n > 0 && x > 0.0).then(|| x.powf(1.0 / n as f64)),
                ratio: prev_inc.filter(|p| *p > 0.0).map(|p| x / p),
            });
            prev_inc = Some(x);
            prev_h = h;
        }
        Ok(rows)
    }

    /// `H(B_n / ∨_{m=1..k} g^{-m} B_n ∨ Σ)`.
    pub fn ks_cyclic<W: Weight>(&self, g: &Word, n: usize, k: usize, cond: Conditioning) -> Result<W::Entropy> {
        if g.is_identity() {
            return Err(Error::IdentityInput);
        }
        let ball = self.ball(n)?;
        let ginv = g.inverse();
        let mut past: Vec<Word> = Vec::new();
        let mut shift = Word::identity();
        for _ in 1..=k {
            shift = shift.multiply(&ginv);
            past.extend(ball.elements().iter().map(|b| shift.multiply(b)));
        }
        self.engine.conditional::<W>(ball.elements(), &past, cond)
    }

    /// Left side `F(n)` against `(1-r) H(B_n) + Σ_{s∈S} h_{⟨s⟩}(B_n)`, each
    /// cyclic term truncated at the first depth where it stops changing.
    pub fn rformula_check<W: Weight>(&self, n: usize, max_depth: usize, cond: Conditioning) -> Result<RformulaCheck> {
        let left = self.f_ball::<W>(n, cond)?;
        let ball = self.ball(n)?;
        let hn = self.h::<W>(ball.elements(), cond)?;
        let r = self.rank() as i64;
        let mut right = hn.scale(1 - r, 1);
        let mut all_stable = true;
        let mut terms = Vec::new();
        let mut lo = right.to_f64();
        let mut hi = right.to_f64();
        for s in Letter::generators(self.rank()) {
            let g = Word::letter(s);
            let mut prev = self.ks_cyclic::<W>(&g, n, 1, cond)?;
            let mut depth = 1;
            let mut stable = false;
            while depth < max_depth {
                let next = self.ks_cyclic::<W>(&g, n, depth + 1, cond)?;
                let same = if W::Entropy::is_exact() {
                    next.sub(&prev).is_zero_entropy()
                } else {
                    (next.to_f64() - prev.to_f64()).abs() < STABILIZATION_TOL
                };
                depth += 1;
                prev = next;
                if same {
                    stable = true;
                    break;
                }
            }
            all_stable &= stable;
            hi += prev.to_f64();
            if stable {
                lo += prev.to_f64();
            }
            right = right.add(&prev);
            terms.push((s, prev.into_value(), depth, stable));
        }
        Ok(RformulaCheck {
            left: left.into_value(),
            right: all_stable.then(|| right.clone().into_value()),
            right_interval: if all_stable {
                (right.to_f64(), right.to_f64())
            } else {
                (lo, hi)
            },
            terms,
        })
    }
}

trait ZeroCheck {
    fn is_zero_entropy(&self) -> bool;
}

impl<E: EntropyValue> ZeroCheck for E {
    fn is_zero_entropy(&self) -> bool {
        self.agrees(&E::zero(), 0.0)
    }
}

/// Whether every truncation of the routes already equals the limit: true for
/// systems whose decay vanishes beyond radius one and whose ball functional is
/// therefore constant.
pub fn exact_structure(spec: &SystemSpec) -> bool {
    match spec {
        SystemSpec::Bernoulli(_) | SystemSpec::Markov(_) | SystemSpec::CosetBernoulli(_) => true,
        SystemSpec::FiniteAction(fa) => fa.partition.is_none(),
        SystemSpec::HiddenMarkov(_) => false,
        SystemSpec::DirectSum(d) => d.components.iter().all(exact_structure),
    }
}

/// Concrete arithmetic for a requested mode. `Auto` stays exact unless the
/// system needs pattern enumeration over more than
/// [`AUTO_RATIONAL_LIMIT`] patterns on a set of `largest_set` elements.
pub fn resolve_mode(mode: NumericMode, spec: &SystemSpec, largest_set: usize) -> NumericMode {
    match mode {
        NumericMode::Auto => {
            if !spec.needs_enumeration() {
                return NumericMode::Rational;
            }
            let a = spec.alphabet().len() as u64;
            let patterns = a.checked_pow(largest_set as u32).unwrap_or(u64::MAX);
            if patterns > AUTO_RATIONAL_LIMIT {
                NumericMode::Float
            } else {
                NumericMode::Rational
            }
        }
        m => m,
    }
}
