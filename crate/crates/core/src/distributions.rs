//! Distributions of risk types on a bounded support `[a, b]` and the expectation
//! functionals built on them.
//!
//! Four representations are supported: uniform, a single atom, two atoms at the support
//! endpoints, and a piecewise-linear density over ordered knots. Expectations over the
//! continuous variants go through [`crate::quadrature`]; the discrete variants are exact sums.
//! Every integral is over a closed interval, so an atom sitting on an interval endpoint is
//! included.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::RiskType;
use crate::quadrature;

/// Number of uniform knots a reweighted density is resampled onto (in addition to the
/// knots already present in the input density and wealth profile).
pub const RESAMPLE_KNOTS: usize = 512;

const MASS_FLOOR: f64 = 1e-300;

/// Serialized form of a [`TypeDistribution`]; the config schema used by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform { a: f64, b: f64 },
    Point { x: f64 },
    TwoPoint { a: f64, b: f64, p: f64 },
    Density { knots: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Uniform { a: f64, b: f64 },
    PointMass { x: f64 },
    /// Mass `p` at `a`, `1 - p` at `b`.
    TwoPoint { a: f64, b: f64, p: f64 },
    Density(LinearDensity),
}

/// Piecewise-linear density, normalized to unit mass.
#[derive(Debug, Clone, PartialEq)]
struct LinearDensity {
    xs: Vec<f64>,
    fs: Vec<f64>,
    /// Cumulative mass at each knot; `cum[0] = 0`, last entry is 1.
    cum: Vec<f64>,
}

impl LinearDensity {
    fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(invalid("knots", "a density needs at least two knots"));
        }
        for (i, &(x, f)) in knots.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 {
                return Err(invalid("knots", format!("knot {i} has non-positive risk type {x}")));
            }
            if !f.is_finite() || f < 0.0 {
                return Err(invalid("knots", format!("knot {i} has negative density {f}")));
            }
            let interior = i > 0 && i + 1 < knots.len();
            if interior && f <= 0.0 {
                return Err(invalid(
                    "knots",
                    format!("density must be strictly positive inside the support (knot {i})"),
                ));
            }
            if i > 0 && x <= knots[i - 1].0 {
                return Err(invalid("knots", "knot risk types must be strictly increasing"));
            }
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let raw: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let mut cum = vec![0.0; xs.len()];
        for k in 1..xs.len() {
            cum[k] = cum[k - 1] + 0.5 * (raw[k - 1] + raw[k]) * (xs[k] - xs[k - 1]);
        }
        let total = *cum.last().unwrap();
        if !(total > 0.0) {
            return Err(invalid("knots", "density has zero total mass"));
        }
        let fs = raw.iter().map(|f| f / total).collect();
        cum.iter_mut().for_each(|c| *c /= total);
        Ok(LinearDensity { xs, fs, cum })
    }

    fn low(&self) -> f64 {
        self.xs[0]
    }

    fn high(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn eval(&self, g: f64) -> f64 {
        if g < self.low() || g > self.high() {
            return 0.0;
        }
        let k = match self.xs.partition_point(|&x| x <= g) {
            0 => 0,
            k if k >= self.xs.len() => self.xs.len() - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let t = (g - x0) / (x1 - x0);
        self.fs[k] + t * (self.fs[k + 1] - self.fs[k])
    }

    fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, integrand: &F) -> Result<f64> {
        let mut total = 0.0;
        for k in 0..self.xs.len() - 1 {
            let s_lo = self.xs[k].max(lo);
            let s_hi = self.xs[k + 1].min(hi);
            if s_hi <= s_lo {
                continue;
            }
            let (x0, x1, f0, f1) = (self.xs[k], self.xs[k + 1], self.fs[k], self.fs[k + 1]);
            let slope = (f1 - f0) / (x1 - x0);
            total += quadrature::integrate(|g| integrand(g) * (f0 + slope * (g - x0)), s_lo, s_hi)?;
        }
        Ok(total)
    }

    /// Inverse CDF.
    fn quantile(&self, u: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c <= u).clamp(1, self.xs.len() - 1) - 1;
        let target = u - self.cum[k];
        let (x0, x1, f0, f1) = (self.xs[k], self.xs[k + 1], self.fs[k], self.fs[k + 1]);
        let slope = (f1 - f0) / (x1 - x0);
        // f0 t + slope t^2 / 2 = target, rationalized root
        let disc = (f0 * f0 + 2.0 * slope * target).max(0.0);
        let denom = f0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * target / denom } else { 0.0 };
        (x0 + t).clamp(x0, x1)
    }

    fn knots(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.fs.iter().copied()).collect()
    }
}

/// Distribution of the risk type `gamma` on a bounded support `[a, b]` with `0 < a <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeDistribution {
    repr: Repr,
}

fn check_support(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || a <= 0.0 {
        return Err(invalid("a", format!("support must start above zero, got {a}")));
    }
    if !b.is_finite() || b < a {
        return Err(invalid("b", format!("support end must be finite and at least a = {a}, got {b}")));
    }
    Ok(())
}

impl TypeDistribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        check_support(a, b)?;
        if a == b {
            return Self::point_mass(a);
        }
        Ok(TypeDistribution {
            repr: Repr::Uniform { a, b },
        })
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        if !x.is_finite() || x <= 0.0 {
            return Err(invalid("x", format!("atom must be positive and finite, got {x}")));
        }
        Ok(TypeDistribution {
            repr: Repr::PointMass { x },
        })
    }

    /// Mass `p` at `a` and `1 - p` at `b`.
    pub fn two_point(a: f64, b: f64, p: f64) -> Result<Self> {
        check_support(a, b)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", format!("mass at a must lie in [0, 1], got {p}")));
        }
        if a == b {
            return Self::point_mass(a);
        }
        Ok(TypeDistribution {
            repr: Repr::TwoPoint { a, b, p },
        })
    }

    /// Piecewise-linear density through `(gamma, density)` knots; renormalized to unit mass.
    pub fn density(knots: &[(f64, f64)]) -> Result<Self> {
        Ok(TypeDistribution {
            repr: Repr::Density(LinearDensity::new(knots)?),
        })
    }

    pub fn support(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Uniform { a, b } | Repr::TwoPoint { a, b, .. } => (*a, *b),
            Repr::PointMass { x } => (*x, *x),
            Repr::Density(d) => (d.low(), d.high()),
        }
    }

    pub fn low(&self) -> f64 {
        self.support().0
    }

    pub fn high(&self) -> f64 {
        self.support().1
    }

    /// True when all mass sits on a single risk type.
    pub fn is_degenerate(&self) -> bool {
        match &self.repr {
            Repr::PointMass { .. } => true,
            Repr::TwoPoint { p, .. } => *p == 0.0 || *p == 1.0,
            _ => false,
        }
    }

    /// True for the variants with atoms.
    pub fn is_discrete(&self) -> bool {
        matches!(self.repr, Repr::PointMass { .. } | Repr::TwoPoint { .. })
    }

    /// Density at `g` for the continuous variants, `None` for the discrete ones.
    pub fn density_at(&self, g: f64) -> Option<f64> {
        match &self.repr {
            Repr::Uniform { a, b } => Some(if g >= *a && g <= *b { 1.0 / (b - a) } else { 0.0 }),
            Repr::Density(d) => Some(d.eval(g)),
            _ => None,
        }
    }

    /// `∫_[lo, hi] integrand(g) dF(g)` over the closed interval.
    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, integrand: F) -> Result<f64> {
        match &self.repr {
            Repr::Uniform { a, b } => {
                let (l, h) = (lo.max(*a), hi.min(*b));
                if h <= l {
                    return Ok(0.0);
                }
                let w = 1.0 / (b - a);
                quadrature::integrate(|g| integrand(g) * w, l, h)
            }
            Repr::PointMass { x } => Ok(if lo <= *x && *x <= hi { integrand(*x) } else { 0.0 }),
            Repr::TwoPoint { a, b, p } => {
                let mut total = 0.0;
                if lo <= *a && *a <= hi && *p > 0.0 {
                    total += p * integrand(*a);
                }
                if lo <= *b && *b <= hi && *p < 1.0 {
                    total += (1.0 - p) * integrand(*b);
                }
                Ok(total)
            }
            Repr::Density(d) => d.integrate(lo, hi, &integrand),
        }
    }

    /// Probability of the closed interval `[lo, hi]`.
    pub fn mass(&self, lo: f64, hi: f64) -> Result<f64> {
        match &self.repr {
            Repr::Uniform { a, b } => Ok(((hi.min(*b) - lo.max(*a)) / (b - a)).max(0.0)),
            Repr::Density(d) => {
                let cdf = |g: f64| -> f64 {
                    if g <= d.low() {
                        return 0.0;
                    }
                    if g >= d.high() {
                        return 1.0;
                    }
                    let k = d.xs.partition_point(|&x| x <= g) - 1;
                    let f_g = d.eval(g);
                    d.cum[k] + 0.5 * (d.fs[k] + f_g) * (g - d.xs[k])
                };
                Ok((cdf(hi) - cdf(lo)).max(0.0))
            }
            _ => self.integrate(lo, hi, |_| 1.0),
        }
    }

    pub fn to_spec(&self) -> DistributionSpec {
        match &self.repr {
            Repr::Uniform { a, b } => DistributionSpec::Uniform { a: *a, b: *b },
            Repr::PointMass { x } => DistributionSpec::Point { x: *x },
            Repr::TwoPoint { a, b, p } => DistributionSpec::TwoPoint { a: *a, b: *b, p: *p },
            Repr::Density(d) => DistributionSpec::Density {
                knots: d.knots().into_iter().map(|(x, f)| [x, f]).collect(),
            },
        }
    }
}

impl TryFrom<DistributionSpec> for TypeDistribution {
    type Error = Error;

    fn try_from(spec: DistributionSpec) -> Result<Self> {
        match spec {
            DistributionSpec::Uniform { a, b } => TypeDistribution::uniform(a, b),
            DistributionSpec::Point { x } => TypeDistribution::point_mass(x),
            DistributionSpec::TwoPoint { a, b, p } => TypeDistribution::two_point(a, b, p),
            DistributionSpec::Density { knots } => {
                let knots: Vec<(f64, f64)> = knots.into_iter().map(|[x, f]| (x, f)).collect();
                TypeDistribution::density(&knots)
            }
        }
    }
}

/// Initial wealth as a positive piecewise-linear function of the risk type, held constant
/// beyond the outermost knots.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthProfile {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl WealthProfile {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.is_empty() {
            return Err(invalid("wealth", "profile needs at least one knot"));
        }
        for (i, &(x, v)) in knots.iter().enumerate() {
            if !x.is_finite() || !v.is_finite() || v <= 0.0 {
                return Err(invalid("wealth", format!("knot {i} must have finite positive wealth")));
            }
            if i > 0 && x <= knots[i - 1].0 {
                return Err(invalid("wealth", "knot risk types must be strictly increasing"));
            }
        }
        Ok(WealthProfile {
            xs: knots.iter().map(|k| k.0).collect(),
            vs: knots.iter().map(|k| k.1).collect(),
        })
    }

    pub fn constant(v: f64) -> Result<Self> {
        WealthProfile::new(&[(1.0, v)])
    }

    pub fn eval(&self, g: f64) -> f64 {
        let n = self.xs.len();
        if g <= self.xs[0] {
            return self.vs[0];
        }
        if g >= self.xs[n - 1] {
            return self.vs[n - 1];
        }
        let k = self.xs.partition_point(|&x| x <= g) - 1;
        let t = (g - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.vs[k] + t * (self.vs[k + 1] - self.vs[k])
    }

    fn is_constant(&self) -> bool {
        self.vs.iter().all(|&v| v == self.vs[0])
    }
}

/// `E_F[integrand(gamma)]`.
pub fn quadrature_expectation<F: Fn(f64) -> f64>(dist: &TypeDistribution, integrand: F) -> Result<f64> {
    let (a, b) = dist.support();
    dist.integrate(a, b, integrand)
}

pub fn mean(dist: &TypeDistribution) -> Result<f64> {
    let (a, b) = dist.support();
    Ok(quadrature_expectation(dist, |g| g)?.clamp(a, b))
}

/// `E_F[1 / gamma]`.
pub fn mean_reciprocal(dist: &TypeDistribution) -> Result<f64> {
    let (a, b) = dist.support();
    Ok(quadrature_expectation(dist, |g| 1.0 / g)?.clamp(1.0 / b, 1.0 / a))
}

fn check_interval(dist: &TypeDistribution, lo: f64, hi: f64) -> Result<()> {
    let (a, b) = dist.support();
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(invalid("interval", format!("[{lo}, {hi}] is not a valid interval")));
    }
    if lo < a * (1.0 - 1e-12) || hi > b * (1.0 + 1e-12) {
        return Err(invalid("interval", format!("[{lo}, {hi}] is not inside the support [{a}, {b}]")));
    }
    Ok(())
}

/// `E_F[gamma | gamma in [lo, hi]]`.
pub fn conditional_mean(dist: &TypeDistribution, lo: f64, hi: f64) -> Result<f64> {
    check_interval(dist, lo, hi)?;
    let mass = dist.mass(lo, hi)?;
    if mass <= MASS_FLOOR {
        return Err(Error::ZeroMass { lo, hi });
    }
    let first = dist.integrate(lo, hi, |g| g)?;
    Ok((first / mass).clamp(lo, hi))
}

/// Mean of `gamma` under the exponentially tilted measure `e^(theta gamma) dF / E[e^(theta gamma)]`.
pub fn tilted_mean(dist: &TypeDistribution, theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(invalid("theta", "tilt must be finite"));
    }
    let (a, b) = dist.support();
    if theta == 0.0 {
        return mean(dist);
    }
    // subtract the largest exponent over the support before exponentiating
    let anchor = if theta > 0.0 { b } else { a };
    let num = dist.integrate(a, b, |g| g * (theta * (g - anchor)).exp())?;
    let den = dist.integrate(a, b, |g| (theta * (g - anchor)).exp())?;
    Ok((num / den).clamp(a, b))
}

/// Renormalized restriction of `dist` to `[lo, hi]`.
pub fn restrict(dist: &TypeDistribution, lo: f64, hi: f64) -> Result<TypeDistribution> {
    check_interval(dist, lo, hi)?;
    let (a, b) = dist.support();
    let (lo, hi) = (lo.max(a), hi.min(b));
    let zero = Error::ZeroMass { lo, hi };
    match &dist.repr {
        Repr::Uniform { .. } => {
            if hi <= lo {
                return Err(zero);
            }
            TypeDistribution::uniform(lo, hi)
        }
        Repr::PointMass { x } => {
            if lo <= *x && *x <= hi {
                Ok(dist.clone())
            } else {
                Err(zero)
            }
        }
        Repr::TwoPoint { a, b, p } => {
            let has_a = lo <= *a && *a <= hi && *p > 0.0;
            let has_b = lo <= *b && *b <= hi && *p < 1.0;
            match (has_a, has_b) {
                (true, true) => Ok(dist.clone()),
                (true, false) => TypeDistribution::point_mass(*a),
                (false, true) => TypeDistribution::point_mass(*b),
                (false, false) => Err(zero),
            }
        }
        Repr::Density(d) => {
            if hi <= lo {
                return Err(zero);
            }
            let mut knots = vec![(lo, d.eval(lo))];
            knots.extend(
                d.xs.iter()
                    .zip(d.fs.iter())
                    .filter(|(x, _)| **x > lo && **x < hi)
                    .map(|(x, f)| (*x, *f)),
            );
            knots.push((hi, d.eval(hi)));
            TypeDistribution::density(&knots).map_err(|_| zero)
        }
    }
}

/// Density proportional to `V0(gamma)^(1 - eta) f(gamma)`.
///
/// Continuous variants are resampled onto [`RESAMPLE_KNOTS`] uniform knots merged with the
/// existing density and wealth knots; between knots the product is linearly interpolated.
pub fn reweight_by_wealth(
    dist: &TypeDistribution,
    wealth: &WealthProfile,
    eta: f64,
) -> Result<TypeDistribution> {
    if !eta.is_finite() {
        return Err(invalid("eta", "must be finite"));
    }
    if eta == 1.0 || wealth.is_constant() {
        return Ok(dist.clone());
    }
    let weight = |g: f64| wealth.eval(g).powf(1.0 - eta);
    match &dist.repr {
        Repr::PointMass { .. } => Ok(dist.clone()),
        Repr::TwoPoint { a, b, p } => {
            let wa = p * weight(*a);
            let wb = (1.0 - p) * weight(*b);
            TypeDistribution::two_point(*a, *b, wa / (wa + wb))
        }
        Repr::Uniform { .. } | Repr::Density(_) => {
            let (a, b) = dist.support();
            let mut xs: Vec<f64> = (0..=RESAMPLE_KNOTS)
                .map(|k| a + (b - a) * k as f64 / RESAMPLE_KNOTS as f64)
                .collect();
            if let Repr::Density(d) = &dist.repr {
                xs.extend(d.xs.iter().copied());
            }
            xs.extend(wealth.xs.iter().copied().filter(|&x| x > a && x < b));
            xs.sort_by(|x, y| x.total_cmp(y));
            xs.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * b);
            *xs.last_mut().unwrap() = b;
            xs[0] = a;
            let knots: Vec<(f64, f64)> = xs
                .iter()
                .map(|&g| (g, weight(g) * dist.density_at(g).unwrap_or(0.0)))
                .collect();
            TypeDistribution::density(&knots)
        }
    }
}

/// `n` independent draws, deterministic in `seed`. Continuous variants use inverse-CDF
/// sampling.
pub fn sample(dist: &TypeDistribution, n: usize, seed: u64) -> Vec<RiskType> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let g = match &dist.repr {
                Repr::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
                Repr::PointMass { x } => *x,
                Repr::TwoPoint { a, b, p } => {
                    if rng.random::<f64>() < *p {
                        *a
                    } else {
                        *b
                    }
                }
                Repr::Density(d) => d.quantile(rng.random::<f64>()),
            };
            RiskType::new(g).expect("draws stay inside a positive support")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni() -> TypeDistribution {
        TypeDistribution::uniform(1.0, 10.0).unwrap()
    }

    fn uniform_as_density(knots: usize) -> TypeDistribution {
        let ks: Vec<(f64, f64)> = (0..knots)
            .map(|k| (1.0 + 9.0 * k as f64 / (knots - 1) as f64, 1.0))
            .collect();
        TypeDistribution::density(&ks).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn construction_validates() {
        assert!(TypeDistribution::uniform(0.0, 1.0).is_err());
        assert!(TypeDistribution::uniform(2.0, 1.0).is_err());
        assert!(TypeDistribution::two_point(1.0, 2.0, 1.5).is_err());
        assert!(TypeDistribution::density(&[(1.0, 1.0)]).is_err());
        assert!(TypeDistribution::density(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(TypeDistribution::density(&[(1.0, 0.0), (2.0, 0.0)]).is_err());
        assert!(TypeDistribution::density(&[(2.0, 1.0), (1.0, 1.0)]).is_err());
        // zero at the endpoints is allowed
        assert!(TypeDistribution::density(&[(1.0, 0.0), (2.0, 1.0), (3.0, 0.0)]).is_ok());
    }

    #[test]
    fn density_is_renormalized() {
        let d = TypeDistribution::density(&[(1.0, 5.0), (3.0, 5.0)]).unwrap();
        let total = quadrature_expectation(&d, |_| 1.0).unwrap();
        assert!(close(total, 1.0, 1e-12));
        assert!(close(d.density_at(2.0).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn mean_examples() {
        assert!(close(mean(&uni()).unwrap(), 5.5, 1e-12));
        assert_eq!(mean(&TypeDistribution::point_mass(3.0).unwrap()).unwrap(), 3.0);
        assert!(close(mean(&uniform_as_density(100)).unwrap(), 5.5, 1e-6));
    }

    #[test]
    fn mean_reciprocal_examples() {
        assert_eq!(mean_reciprocal(&TypeDistribution::point_mass(2.0).unwrap()).unwrap(), 0.5);
        // analytic: ln(10) / 9
        assert!(close(mean_reciprocal(&uni()).unwrap(), 10f64.ln() / 9.0, 1e-13));
        let tp = TypeDistribution::two_point(1.0, 10.0, 0.5).unwrap();
        assert!(close(mean_reciprocal(&tp).unwrap(), 0.55, 1e-15));
    }

    #[test]
    fn conditional_mean_examples() {
        let s = 10f64.sqrt();
        assert!(close(conditional_mean(&uni(), 1.0, s).unwrap(), (1.0 + s) / 2.0, 1e-13));
        let pm = TypeDistribution::point_mass(4.0).unwrap();
        assert_eq!(conditional_mean(&pm, 4.0, 4.0).unwrap(), 4.0);
        assert!(close(conditional_mean(&uni(), 1.0, 10.0).unwrap(), mean(&uni()).unwrap(), 1e-14));
        let tp = TypeDistribution::two_point(1.0, 10.0, 0.3).unwrap();
        assert!(matches!(conditional_mean(&tp, 2.0, 5.0), Err(Error::ZeroMass { .. })));
        assert!(conditional_mean(&uni(), 0.5, 3.0).is_err());
    }

    #[test]
    fn tilted_mean_examples() {
        assert!(close(tilted_mean(&uni(), 0.0).unwrap(), 5.5, 1e-12));
        // closed form for a uniform: (b e^{tb} - a e^{ta}) / (e^{tb} - e^{ta}) - 1/t
        let t = 40.0;
        let oracle = (10.0 - (t * -9.0f64).exp()) / (1.0 - (t * -9.0f64).exp()) - 1.0 / t;
        let v = tilted_mean(&uni(), t).unwrap();
        assert!(close(v, oracle, 1e-10));
        assert!((v - 10.0).abs() < 1e-2 + 0.03);
        assert!(10.0 - v < 0.03);
        let pm = TypeDistribution::point_mass(2.5).unwrap();
        assert_eq!(tilted_mean(&pm, 3.0).unwrap(), 2.5);
    }

    #[test]
    fn tilted_mean_handles_huge_exponents() {
        let v = tilted_mean(&uni(), 700.0).unwrap();
        assert!(v <= 10.0 && v > 9.99);
        let w = tilted_mean(&uni(), -700.0).unwrap();
        assert!(w >= 1.0 && w < 1.01);
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(restrict(&uni(), 2.0, 5.0).unwrap(), TypeDistribution::uniform(2.0, 5.0).unwrap());
        assert_eq!(restrict(&uni(), 1.0, 10.0).unwrap(), uni());
        let r = restrict(&uni(), 2.0, 7.0).unwrap();
        assert!(close(mean(&r).unwrap(), conditional_mean(&uni(), 2.0, 7.0).unwrap(), 1e-13));
        let tp = TypeDistribution::two_point(1.0, 10.0, 0.3).unwrap();
        assert_eq!(restrict(&tp, 1.0, 4.0).unwrap(), TypeDistribution::point_mass(1.0).unwrap());
        assert!(restrict(&tp, 2.0, 4.0).is_err());
    }

    #[test]
    fn restrict_density_matches_conditional_mean() {
        let d = TypeDistribution::density(&[(1.0, 1.0), (4.0, 3.0), (10.0, 0.5)]).unwrap();
        let r = restrict(&d, 2.0, 6.0).unwrap();
        assert!(close(mean(&r).unwrap(), conditional_mean(&d, 2.0, 6.0).unwrap(), 1e-12));
        let same = restrict(&d, 1.0, 10.0).unwrap();
        assert!(close(mean(&same).unwrap(), mean(&d).unwrap(), 1e-13));
    }

    #[test]
    fn restrict_composes() {
        let d = TypeDistribution::density(&[(1.0, 1.0), (4.0, 3.0), (10.0, 0.5)]).unwrap();
        for dist in [uni(), d] {
            let twice = restrict(&restrict(&dist, 2.0, 8.0).unwrap(), 3.0, 5.0).unwrap();
            let once = restrict(&dist, 3.0, 5.0).unwrap();
            assert!(close(mean(&twice).unwrap(), mean(&once).unwrap(), 1e-13));
            assert!(close(mean_reciprocal(&twice).unwrap(), mean_reciprocal(&once).unwrap(), 1e-13));
        }
    }

    #[test]
    fn reweight_examples() {
        let w = WealthProfile::new(&[(1.0, 1.0), (10.0, 10.0)]).unwrap();
        assert_eq!(reweight_by_wealth(&uni(), &w, 1.0).unwrap(), uni());
        let flat = WealthProfile::constant(3.0).unwrap();
        assert_eq!(reweight_by_wealth(&uni(), &flat, 0.3).unwrap(), uni());
        // density proportional to g: mean = (2/3)(10^3 - 1)/(10^2 - 1)
        let r = reweight_by_wealth(&uni(), &w, 0.0).unwrap();
        let oracle = 2.0 / 3.0 * 999.0 / 99.0;
        assert!(close(mean(&r).unwrap(), oracle, 1e-10));
        let tp = TypeDistribution::two_point(1.0, 10.0, 0.5).unwrap();
        let rt = reweight_by_wealth(&tp, &w, 0.0).unwrap();
        assert!(close(mean(&rt).unwrap(), (1.0 + 100.0) / 11.0, 1e-12));
    }

    #[test]
    fn quadrature_expectation_examples() {
        assert!(close(quadrature_expectation(&uni(), |_| 1.0).unwrap(), 1.0, 1e-14));
        assert!(close(quadrature_expectation(&uni(), |g| g).unwrap(), 5.5, 1e-10));
        let d = TypeDistribution::uniform(0.5, 1.0).unwrap();
        // density is 2 on [0.5, 1]
        let v = quadrature_expectation(&d, |g| g.exp()).unwrap();
        assert!(close(v, 2.0 * (std::f64::consts::E - 0.5f64.exp()), 1e-13));
    }

    #[test]
    fn sample_examples() {
        let pm = TypeDistribution::point_mass(3.0).unwrap();
        assert!(sample(&pm, 5, 1).iter().all(|g| g.value() == 3.0));
        let xs = sample(&uni(), 1_000_000, 99);
        let n = xs.len() as f64;
        let m = xs.iter().map(|g| g.value()).sum::<f64>() / n;
        let var = xs.iter().map(|g| (g.value() - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((m - 5.5).abs() < 3.0 * (var / n).sqrt());
        assert_eq!(sample(&uni(), 100, 5), sample(&uni(), 100, 5));
    }

    #[test]
    fn density_sampling_matches_mean() {
        let d = TypeDistribution::density(&[(1.0, 0.0), (3.0, 2.0), (10.0, 0.5)]).unwrap();
        let xs = sample(&d, 400_000, 3);
        let n = xs.len() as f64;
        let m = xs.iter().map(|g| g.value()).sum::<f64>() / n;
        let var = xs.iter().map(|g| (g.value() - m).powi(2)).sum::<f64>() / (n - 1.0);
        let exact = mean(&d).unwrap();
        assert!((m - exact).abs() < 3.0 * (var / n).sqrt(), "{m} vs {exact}");
    }

    #[test]
    fn spec_round_trip() {
        let json = r#"{"type":"two_point","a":1,"b":10,"p":0.5}"#;
        let spec: DistributionSpec = serde_json::from_str(json).unwrap();
        let d = TypeDistribution::try_from(spec.clone()).unwrap();
        assert_eq!(d.to_spec(), spec);
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"type":"uniform","a":1,"b":2,"c":3}"#).is_err());
        let dens: DistributionSpec =
            serde_json::from_str(r#"{"type":"density","knots":[[1,1],[2,3]]}"#).unwrap();
        assert!(TypeDistribution::try_from(dens).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_dist() -> impl Strategy<Value = TypeDistribution> {
            prop_oneof![
                (0.2f64..5.0, 0.01f64..20.0).prop_map(|(a, w)| TypeDistribution::uniform(a, a + w).unwrap()),
                (0.2f64..5.0).prop_map(|x| TypeDistribution::point_mass(x).unwrap()),
                (0.2f64..5.0, 0.01f64..20.0, 0.0f64..=1.0)
                    .prop_map(|(a, w, p)| TypeDistribution::two_point(a, a + w, p).unwrap()),
                (0.2f64..5.0, 0.1f64..5.0, 0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, f0, f1, f2)| {
                    TypeDistribution::density(&[(a, f0), (a + 1.0, f1), (a + 3.0, f2)]).unwrap()
                }),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn expectations_stay_in_hull(d in any_dist(), theta in -5.0f64..5.0) {
                let (a, b) = d.support();
                let m = mean(&d).unwrap();
                prop_assert!(m >= a && m <= b);
                let t = tilted_mean(&d, theta).unwrap();
                prop_assert!(t >= a && t <= b);
                let r = mean_reciprocal(&d).unwrap();
                prop_assert!(r >= 1.0 / b - 1e-15 && r <= 1.0 / a + 1e-15);
            }

            #[test]
            fn jensen_for_reciprocal(d in any_dist()) {
                let r = mean_reciprocal(&d).unwrap();
                let m = mean(&d).unwrap();
                if d.is_degenerate() {
                    prop_assert!((r - 1.0 / m).abs() < 1e-14);
                } else {
                    prop_assert!(r > 1.0 / m);
                }
            }

            #[test]
            fn tilted_mean_increasing(d in any_dist(), t1 in -3.0f64..3.0, dt in 0.01f64..3.0) {
                let lo = tilted_mean(&d, t1).unwrap();
                let hi = tilted_mean(&d, t1 + dt).unwrap();
                if d.is_degenerate() {
                    prop_assert_eq!(lo, hi);
                } else {
                    prop_assert!(hi >= lo, "{} < {}", hi, lo);
                    // strict unless the tilt has pushed the mean to an endpoint in floating point
                    let (a, b) = d.support();
                    if lo > a + 1e-6 * b && hi < b - 1e-6 * b {
                        prop_assert!(hi > lo, "{} !> {}", hi, lo);
                    }
                }
            }
        }
    }
}
