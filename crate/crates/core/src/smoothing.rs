//! Smoothed instances: per-job bounded densities, sampling and Hoeffding
//! estimates.
//!
//! Densities are piecewise constant on `[0, scale]` with height at most
//! `phi / scale`; for `scale = 1` this is the usual bound `f_j <= phi`.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, MachineSet};
use crate::rng::{derive_seed, stream};

const MASS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensitySpec {
    pieces: Vec<Piece>,
    phi: f64,
    scale: f64,
}

impl DensitySpec {
    /// Pieces are sorted by left endpoint; zero-height pieces are kept.
    pub fn new(mut pieces: Vec<Piece>, phi: f64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidDensity(format!("scale must be positive, got {scale}")));
        }
        if !(phi.is_finite() && phi >= 1.0) {
            return Err(Error::InvalidDensity(format!("phi must be at least 1, got {phi}")));
        }
        if pieces.is_empty() {
            return Err(Error::InvalidDensity("no pieces".into()));
        }
        pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
        let mut mass = 0.0;
        let mut sup: f64 = 0.0;
        for (k, piece) in pieces.iter().enumerate() {
            let Piece { a, b, h } = *piece;
            if !(a.is_finite() && b.is_finite() && h.is_finite()) {
                return Err(Error::InvalidDensity(format!("piece {k} is not finite")));
            }
            if a < 0.0 || b > scale || a >= b {
                return Err(Error::InvalidDensity(format!(
                    "piece [{a}, {b}) is not a non-empty interval inside [0, {scale}]"
                )));
            }
            if h < 0.0 {
                return Err(Error::InvalidDensity(format!("piece {k} has negative height")));
            }
            if k > 0 && pieces[k - 1].b > a {
                return Err(Error::InvalidDensity("pieces overlap".into()));
            }
            mass += (b - a) * h;
            sup = sup.max(h);
        }
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDensity(format!("total mass {mass} is not 1")));
        }
        if sup > phi / scale * (1.0 + MASS_TOL) {
            return Err(Error::InvalidDensity(format!(
                "height {sup} exceeds phi / scale = {}",
                phi / scale
            )));
        }
        Ok(DensitySpec { pieces, phi, scale })
    }

    /// Uniform on `[a, b)` inside `[0, scale]`; `phi = scale / (b - a)`.
    pub fn uniform(a: f64, b: f64, scale: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidDensity(format!("empty interval [{a}, {b})")));
        }
        let h = 1.0 / (b - a);
        Self::new(vec![Piece { a, b, h }], (scale * h).max(1.0), scale)
    }

    /// The same density declared against a larger smoothness parameter.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.pieces.clone(), phi, self.scale)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.pieces.iter().map(|p| p.h * (p.b * p.b - p.a * p.a) / 2.0).sum()
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (f64, f64) {
        let nonzero = self.pieces.iter().filter(|p| p.h > 0.0);
        let lo = nonzero.clone().map(|p| p.a).fold(f64::INFINITY, f64::min);
        let hi = nonzero.map(|p| p.b).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Inverse CDF at `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut cum = 0.0;
        let mut last = None;
        for piece in self.pieces.iter().filter(|p| p.h > 0.0) {
            let mass = (piece.b - piece.a) * piece.h;
            if u <= cum + mass {
                let x = piece.a + (u - cum) / piece.h;
                return x.clamp(piece.a, piece.b);
            }
            cum += mass;
            last = Some(piece);
        }
        // rounding left a sliver of mass past the last piece
        last.map_or(0.0, |p| p.b)
    }
}

/// Uniform density on `[a, b)` with scale 1.
pub fn uniform_spec(a: f64, b: f64) -> Result<DensitySpec> {
    DensitySpec::uniform(a, b, 1.0)
}

/// Deterministic machine data plus one density per job.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothedInstanceSpec {
    speeds: Vec<f64>,
    allowed: Vec<Option<MachineSet>>,
    densities: Vec<DensitySpec>,
}

impl SmoothedInstanceSpec {
    pub fn new(speeds: Vec<f64>, densities: Vec<DensitySpec>) -> Result<Self> {
        let allowed = vec![None; densities.len()];
        Self::with_allowed(speeds, densities, allowed)
    }

    pub fn with_allowed(
        speeds: Vec<f64>,
        densities: Vec<DensitySpec>,
        allowed: Vec<Option<MachineSet>>,
    ) -> Result<Self> {
        if allowed.len() != densities.len() {
            return Err(Error::InvalidInstance(format!(
                "{} allowed sets for {} jobs",
                allowed.len(),
                densities.len()
            )));
        }
        // validates speeds and allowed sets against a placeholder job vector
        let means: Vec<f64> = densities.iter().map(|d| d.mean().max(f64::MIN_POSITIVE)).collect();
        Instance::with_allowed(speeds.clone(), means, allowed.clone())?;
        Ok(SmoothedInstanceSpec {
            speeds,
            allowed,
            densities,
        })
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn allowed(&self) -> &[Option<MachineSet>] {
        &self.allowed
    }

    pub fn densities(&self) -> &[DensitySpec] {
        &self.densities
    }

    pub fn num_machines(&self) -> usize {
        self.speeds.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.densities.len()
    }

    /// Largest smoothness parameter over all jobs.
    pub fn phi(&self) -> f64 {
        self.densities.iter().map(DensitySpec::phi).fold(1.0, f64::max)
    }

    /// Expected instance: every job at its density's mean.
    pub fn mean_instance(&self) -> Result<Instance> {
        let means = self.densities.iter().map(DensitySpec::mean).collect();
        Instance::with_allowed(self.speeds.clone(), means, self.allowed.clone())
    }
}

/// Draw `p_j` for job `j` from stream `(seed, j)`.
pub fn sample_processing(density: &DensitySpec, seed: u64, job: usize) -> f64 {
    let u: f64 = stream(seed, job as u64).sample(Open01);
    density.quantile(u)
}

/// Independent draw of every processing requirement.
pub fn sample_instance(spec: &SmoothedInstanceSpec, seed: u64) -> Result<Instance> {
    let p: Vec<f64> = spec
        .densities
        .iter()
        .enumerate()
        .map(|(j, d)| sample_processing(d, seed, j))
        .collect();
    Instance::with_allowed(spec.speeds.clone(), p, spec.allowed.clone())
}

/// Hoeffding's bound `exp(-2 t^2 / sum (b_j - a_j)^2)` on a one-sided
/// deviation of at least `t` of a sum of independent bounded variables.
pub fn hoeffding_tail(ranges: &[(f64, f64)], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let mut width = 0.0;
    for &(a, b) in ranges {
        if !(b >= a) {
            return Err(Error::InvalidParameter(format!("range [{a}, {b}] is reversed")));
        }
        width += (b - a) * (b - a);
    }
    if width == 0.0 {
        return Ok(0.0);
    }
    Ok((-2.0 * t * t / width).exp())
}

/// Two-sided Hoeffding interval `mean +- range * sqrt(ln(2/delta) / (2N))`.
pub fn hoeffding_ci(samples: &[f64], range: f64, delta: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 2], got {delta}")));
    }
    if !(range >= 0.0) {
        return Err(Error::InvalidParameter(format!("range must be non-negative, got {range}")));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let half = range * ((2.0 / delta).ln() / (2.0 * samples.len() as f64)).sqrt();
    Ok((mean - half, mean + half))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub count: usize,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub delta: f64,
    /// Width of the interval the samples are known to lie in.
    pub range: f64,
}

impl RatioEstimate {
    pub fn from_samples(samples: Vec<f64>, range: f64, delta: f64) -> Result<Self> {
        let (ci_low, ci_high) = hoeffding_ci(&samples, range, delta)?;
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        Ok(RatioEstimate {
            count: samples.len(),
            samples,
            mean,
            ci_low: ci_low.min(mean),
            ci_high: ci_high.max(mean),
            delta,
            range,
        })
    }
}

/// Frequency over `trials` of `Q <= (n - sqrt(n ln n)) / (2 phi)` for `n`
/// independent uniform draws from `[0, 1/phi]`.
pub fn check_sum_lower_tail(n: usize, phi: f64, trials: usize, seed: u64) -> Result<f64> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidParameter("n and trials must be positive".into()));
    }
    if !(phi.is_finite() && phi >= 1.0) {
        return Err(Error::InvalidParameter(format!("phi must be at least 1, got {phi}")));
    }
    let nf = n as f64;
    let threshold = (nf - (nf * nf.ln()).sqrt()) / (2.0 * phi);
    let hits = (0..trials)
        .filter(|&t| {
            let mut rng = stream(derive_seed(seed, t as u64), 0);
            let q: f64 = (0..n).map(|_| rng.sample::<f64, _>(Open01) / phi).sum();
            q <= threshold
        })
        .count();
    Ok(hits as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        let d = uniform_spec(0.0, 1.0).unwrap();
        assert_eq!(d.phi(), 1.0);
        let phi = 10.0;
        let d = uniform_spec(1.0 - 1.0 / phi, 1.0).unwrap();
        assert!((d.phi() - phi).abs() < 1e-9);
        let d = uniform_spec(0.0, 0.5).unwrap();
        assert_eq!(d.pieces()[0].h, 2.0);
        assert_eq!(d.phi(), 2.0);
        assert!(d.with_phi(1.5).is_err());
        assert!(d.with_phi(4.0).is_ok());
    }

    #[test]
    fn invalid_densities() {
        let p = |a, b, h| Piece { a, b, h };
        assert!(DensitySpec::new(vec![p(0.0, 0.5, 1.0)], 2.0, 1.0).is_err());
        assert!(DensitySpec::new(vec![p(0.0, 0.6, 1.0), p(0.5, 0.9, 1.0)], 2.0, 1.0).is_err());
        assert!(DensitySpec::new(vec![p(0.0, 0.25, 4.0)], 2.0, 1.0).is_err());
        assert!(DensitySpec::new(vec![p(0.5, 1.5, 1.0)], 1.0, 1.0).is_err());
        assert!(DensitySpec::new(vec![], 1.0, 1.0).is_err());
        let ok = DensitySpec::new(vec![p(0.5, 1.0, 1.0), p(0.0, 0.25, 2.0)], 2.0, 1.0).unwrap();
        assert_eq!(ok.pieces()[0].a, 0.0);
    }

    #[test]
    fn sampling_is_reproducible_and_order_free() {
        let dens: Vec<DensitySpec> = (0..20).map(|_| uniform_spec(0.0, 1.0).unwrap()).collect();
        let spec = SmoothedInstanceSpec::new(vec![1.0, 1.0], dens).unwrap();
        let a = sample_instance(&spec, 5).unwrap();
        assert_eq!(a, sample_instance(&spec, 5).unwrap());
        assert_ne!(a, sample_instance(&spec, 6).unwrap());
        for j in 0..20 {
            assert_eq!(a.p(j), sample_processing(&spec.densities()[j], 5, j));
        }
    }

    #[test]
    fn support_is_respected() {
        let phi = 10.0;
        let d = uniform_spec(1.0 - 1.0 / phi, 1.0).unwrap();
        let spec = SmoothedInstanceSpec::new(vec![1.0], vec![d; 1000]).unwrap();
        let a = sample_instance(&spec, 1).unwrap();
        assert!(a.jobs().iter().all(|&p| (0.9 - 1e-12..=1.0).contains(&p)));
    }

    #[test]
    fn uniform_mean() {
        let d = uniform_spec(0.0, 1.0).unwrap();
        let n = 100_000;
        let mean = (0..n).map(|j| sample_processing(&d, 3, j)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn piece_heights_match_histogram() {
        let p = |a, b, h| Piece { a, b, h };
        let d = DensitySpec::new(vec![p(0.0, 0.25, 2.0), p(0.5, 1.0, 1.0)], 2.0, 1.0).unwrap();
        let n = 100_000;
        let buckets = 20;
        let mut counts = vec![0usize; buckets];
        for j in 0..n {
            let x = sample_processing(&d, 17, j);
            assert!((0.0..=0.25).contains(&x) || (0.5..=1.0).contains(&x));
            counts[((x * buckets as f64) as usize).min(buckets - 1)] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let mid = (k as f64 + 0.5) / buckets as f64;
            let h = d.pieces().iter().find(|p| p.a <= mid && mid < p.b).map_or(0.0, |p| p.h);
            let expected = h / buckets as f64 * n as f64;
            if expected == 0.0 {
                assert_eq!(c, 0);
            } else {
                assert!((c as f64 - expected).abs() <= 0.05 * expected, "bucket {k}: {c} vs {expected}");
            }
        }
    }

    #[test]
    fn hoeffding_examples() {
        assert!((hoeffding_tail(&[(0.0, 1.0)], 0.5).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!(hoeffding_tail(&[(0.0, 1.0)], 1e-9).unwrap() > 1.0 - 1e-15);
        let n = 100usize;
        let phi = 2.0;
        let ranges = vec![(0.0, 1.0 / phi); n];
        let t = ((n as f64) * (n as f64).ln()).sqrt() / (2.0 * phi);
        assert!((hoeffding_tail(&ranges, t).unwrap() - 0.1).abs() < 1e-12);
        assert!(hoeffding_tail(&ranges, 0.0).is_err());
    }

    #[test]
    fn ci_examples() {
        let (lo, hi) = hoeffding_ci(&[3.0; 10], 1.0, 0.05).unwrap();
        let half = ((2.0f64 / 0.05).ln() / 20.0).sqrt();
        assert!((lo - (3.0 - half)).abs() < 1e-15 && (hi - (3.0 + half)).abs() < 1e-15);
        assert_eq!(hoeffding_ci(&[0.3, 0.7], 1.0, 2.0).unwrap(), (0.5, 0.5));
        let samples: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
        let (lo, hi) = hoeffding_ci(&samples, 1.0, 0.05).unwrap();
        assert!(((hi - lo) / 2.0 - (40f64.ln() / 200.0).sqrt()).abs() < 1e-6);
        assert!(hoeffding_ci(&[], 1.0, 0.05).is_err());
    }

    #[test]
    fn sum_tail_examples() {
        let f = check_sum_lower_tail(100, 2.0, 2000, 1).unwrap();
        assert!(f <= 0.1);
        let f = check_sum_lower_tail(1, 2.0, 4000, 1).unwrap();
        assert!((f - 0.5).abs() < 0.05, "{f}");
        // both the sum and the threshold scale with 1/phi
        assert_eq!(
            check_sum_lower_tail(30, 2.0, 500, 9).unwrap(),
            check_sum_lower_tail(30, 8.0, 500, 9).unwrap()
        );
    }
}
