//! Reference laws: Poisson, exponential, Rayleigh, and the standard normal
//! CDF on the imaginary axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::log_gamma_hp;
use crate::error::{domain, Error, Result};
use crate::hp::HPReal;

/// Complex carrier for `Φ(it)` and characteristic functions.
pub type ComplexValue = Complex64;

/// Largest `|x|` accepted by [`erfi`].
pub const ERFI_MAX_ARG: f64 = 12.0;

/// Pmf arguments above this are evaluated in log space.
const POISSON_DIRECT_MAX_K: u64 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonLaw {
    lambda: f64,
}

impl PoissonLaw {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return domain(format!("Poisson rate must be finite and >= 0, got {lambda}"));
        }
        Ok(PoissonLaw { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `λ^k e^{-λ} / k!`.
    pub fn pmf(&self, k: u64) -> f64 {
        let lambda = self.lambda;
        if lambda == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if k <= POISSON_DIRECT_MAX_K {
            let mut p = (-lambda).exp();
            for i in 1..=k {
                p *= lambda / i as f64;
            }
            p
        } else {
            let ln_fact = log_gamma_hp(k as f64).map(|h| h.to_f64()).unwrap_or(f64::INFINITY);
            (k as f64 * lambda.ln() - lambda - ln_fact).exp()
        }
    }

    /// Upper truncation point `λ + 20√λ + 20` used for normalization checks.
    pub fn truncation_point(&self) -> u64 {
        (self.lambda + 20.0 * self.lambda.sqrt() + 20.0).ceil() as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialLaw {
    lambda: f64,
}

impl ExponentialLaw {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!("exponential rate must be finite and > 0, got {lambda}"));
        }
        Ok(ExponentialLaw { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `P{W > w} = e^{-λw}`.
    pub fn sf(&self, w: f64) -> Result<f64> {
        if !(w >= 0.0) {
            return domain(format!("survival argument must be >= 0, got {w}"));
        }
        Ok((-(self.lambda * w)).exp())
    }
}

/// Rayleigh law with scale `sigma`: `P{W > w} = e^{-w²/(2σ²)}`.
///
/// The scale is not a rate; `Ray(1)` is the standard law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighLaw {
    sigma: f64,
}

impl RayleighLaw {
    pub const STANDARD: RayleighLaw = RayleighLaw { sigma: 1.0 };

    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return domain(format!("Rayleigh scale must be finite and > 0, got {sigma}"));
        }
        Ok(RayleighLaw { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Evaluated as the unit exponential survival at `(w/σ)²/2`.
    pub fn sf(&self, w: f64) -> Result<f64> {
        if !(w >= 0.0) {
            return domain(format!("survival argument must be >= 0, got {w}"));
        }
        let s = w / self.sigma;
        ExponentialLaw { lambda: 1.0 }.sf(0.5 * (s * s))
    }

    pub fn cdf(&self, w: f64) -> Result<f64> {
        Ok(1.0 - self.sf(w)?)
    }

    pub fn median(&self) -> f64 {
        self.sigma * (2.0 * std::f64::consts::LN_2).sqrt()
    }
}

/// `Γ(j/2)` for a positive integer `j`.
pub fn gamma_half_integer(j: u32) -> f64 {
    assert!(j > 0, "Γ(0) is undefined");
    let (mut value, mut arg) = if j.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    let target = j as f64 / 2.0;
    while arg < target {
        value *= arg;
        arg += 1.0;
    }
    value
}

/// `E(W^k) = √2^k Γ(k/2 + 1)` for the standard Rayleigh law.
pub fn rayleigh_moment(k: u32) -> f64 {
    std::f64::consts::SQRT_2.powi(k as i32) * gamma_half_integer(k + 2)
}

/// Imaginary error function `(2/√π) ∫₀ˣ e^{t²} dt`.
///
/// The Maclaurin series has only positive terms for `x > 0`, so it is summed
/// directly in double-double for every admissible argument.
pub fn erfi(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > ERFI_MAX_ARG {
        return Err(Error::Range(format!(
            "erfi argument |x| must be <= {ERFI_MAX_ARG}, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let ax = x.abs();
    let x2 = HPReal::from_f64(ax) * HPReal::from_f64(ax);
    // power = x^{2k+1} / k!
    let mut power = HPReal::from_f64(ax);
    let mut sum = power;
    let mut k = 0u32;
    loop {
        k += 1;
        power = power * x2 / (k as f64);
        let term = power / (2.0 * k as f64 + 1.0);
        sum = sum + term;
        if term.to_f64() < 1e-18 * sum.to_f64() {
            break;
        }
    }
    let two_over_sqrt_pi = HPReal::from_f64(2.0) / HPReal::pi().sqrt();
    Ok((sum * two_over_sqrt_pi).to_f64().copysign(x))
}

/// `Φ(it) = (1 + i·erfi(t/√2)) / 2`.
pub fn std_normal_cdf_imag(t: f64) -> Result<ComplexValue> {
    if !t.is_finite() || t.abs() > ERFI_MAX_ARG {
        return Err(Error::Range(format!("|t| must be <= {ERFI_MAX_ARG}, got {t}")));
    }
    Ok(Complex64::new(0.5, 0.5 * erfi(t / std::f64::consts::SQRT_2)?))
}

/// Characteristic function of the standard Rayleigh law,
/// `√(2π) e^{-t²/2} it Φ(it) + 1`.
pub fn rayleigh_charfn(t: f64) -> Result<ComplexValue> {
    let phi = std_normal_cdf_imag(t)?;
    let scale = (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * t * t).exp();
    Ok(Complex64::new(0.0, t) * phi * scale + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn poisson_point_values() {
        assert_eq!(PoissonLaw::new(0.0).unwrap().pmf(0), 1.0);
        assert_eq!(PoissonLaw::new(0.0).unwrap().pmf(3), 0.0);
        let p = PoissonLaw::new(1.0).unwrap().pmf(0);
        assert!((p - 0.367879441171442).abs() < 1e-15);
        // rational part 2.5^3/6 = 125/48, then times e^{-2.5}
        let expected = 125.0 / 48.0 * (-2.5f64).exp();
        let got = PoissonLaw::new(2.5).unwrap().pmf(3);
        assert!((got - expected).abs() <= 1e-15 * expected);
        assert!(PoissonLaw::new(-1.0).is_err());
    }

    #[test]
    fn poisson_log_space_branch_is_continuous() {
        let law = PoissonLaw::new(30.0).unwrap();
        // ratio of consecutive pmf values is λ/k on both sides of the switch
        for k in 29..33 {
            let r = law.pmf(k + 1) / law.pmf(k);
            assert!((r - 30.0 / (k + 1) as f64).abs() < 1e-12, "k={k} r={r}");
        }
    }

    #[test]
    fn poisson_mass_sums_to_one() {
        for lambda in [0.5, 1.0, 5.0, 20.0] {
            let law = PoissonLaw::new(lambda).unwrap();
            let total: f64 = (0..=law.truncation_point()).map(|k| law.pmf(k)).sum();
            assert!((total - 1.0).abs() < 1e-12, "λ={lambda} total={total}");
        }
    }

    #[test]
    fn exponential_values() {
        let unit = ExponentialLaw::new(1.0).unwrap();
        assert_eq!(unit.sf(0.0).unwrap(), 1.0);
        assert!((unit.sf(std::f64::consts::LN_2).unwrap() - 0.5).abs() < 1e-16);
        // e^{-0.6} from 40 terms of the exponential series
        let mut term = 1.0f64;
        let mut series = 1.0f64;
        for k in 1..40 {
            term *= -0.6 / k as f64;
            series += term;
        }
        let got = ExponentialLaw::new(3.0).unwrap().sf(0.2).unwrap();
        assert!((got - series).abs() < 1e-15);
        assert!(unit.sf(-1.0).is_err());
        assert!(ExponentialLaw::new(0.0).is_err());
    }

    #[test]
    fn rayleigh_values() {
        let r = RayleighLaw::STANDARD;
        assert_eq!(r.sf(0.0).unwrap(), 1.0);
        assert!((r.sf((2.0 * std::f64::consts::LN_2).sqrt()).unwrap() - 0.5).abs() < 1e-15);
        let w = 1.2533;
        assert!((r.sf(w).unwrap() - (-w * w / 2.0f64).exp()).abs() < 1e-16);
        assert!((r.median() - (2.0 * std::f64::consts::LN_2).sqrt()).abs() < 1e-12);
        let scaled = RayleighLaw::new(3.0).unwrap();
        assert!((scaled.median() - 3.0 * (2.0 * std::f64::consts::LN_2).sqrt()).abs() < 1e-12);
        assert!(r.sf(-0.1).is_err());
        assert!((r.cdf(1.0).unwrap() - (1.0 - (-0.5f64).exp())).abs() < 1e-16);
    }

    #[test]
    fn rayleigh_matches_exponential_bitwise() {
        let unit = ExponentialLaw::new(1.0).unwrap();
        for i in 0..2000 {
            let w = i as f64 * 0.00731;
            assert_eq!(
                RayleighLaw::STANDARD.sf(w).unwrap().to_bits(),
                unit.sf(w * w / 2.0).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn rayleigh_moments() {
        assert_eq!(rayleigh_moment(0), 1.0);
        assert!((rayleigh_moment(1) - 1.2533141373155).abs() < 1e-12);
        assert!((rayleigh_moment(2) - 2.0).abs() < 1e-15);
        for k in 0..=8u32 {
            let q = integrate(|w| w.powi(k as i32) * w * (-w * w / 2.0).exp(), 0.0, 40.0, 1e-15);
            let m = rayleigh_moment(k);
            assert!(((q - m) / m).abs() < 1e-10, "k={k}: {q} vs {m}");
        }
    }

    #[test]
    fn gamma_at_half_integers() {
        assert!((gamma_half_integer(1) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half_integer(2), 1.0);
        assert_eq!(gamma_half_integer(10), 24.0);
        assert!((gamma_half_integer(5) - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn erfi_symmetry_and_zero() {
        assert_eq!(erfi(0.0).unwrap(), 0.0);
        for a in [0.3, 1.0, 2.7, 5.5, 11.0] {
            assert_eq!(erfi(-a).unwrap(), -erfi(a).unwrap());
        }
        assert!(matches!(erfi(12.5), Err(Error::Range(_))));
    }

    #[test]
    fn erfi_at_one_matches_exact_series() {
        // Σ_{k<60} 1/(k!(2k+1)) in exact rationals, then 2/√π in double-double
        let mut fact = BigInt::from(1);
        let mut sum = BigRational::from_integer(BigInt::from(0));
        for k in 0..60u32 {
            if k > 0 {
                fact *= k;
            }
            sum += BigRational::new(BigInt::from(1), &fact * BigInt::from(2 * k + 1));
        }
        let oracle = HPReal::from_ratio(&sum) * HPReal::from_f64(2.0) / HPReal::pi().sqrt();
        let got = erfi(1.0).unwrap();
        assert!((got - oracle.to_f64()).abs() < 4e-16, "{got} vs {}", oracle.to_f64());
        assert!((got - 1.650425758797542876).abs() < 4e-16);
    }

    #[test]
    fn erfi_derivative_relation() {
        let h = 1e-5;
        for x in [0.1f64, 0.5, 1.0, 2.0] {
            let fd = (erfi(x + h).unwrap() - erfi(x - h).unwrap()) / (2.0 * h);
            let exact = 2.0 / std::f64::consts::PI.sqrt() * (x * x).exp();
            assert!(((fd - exact) / exact).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn erfi_large_argument_against_reference() {
        // reference values from a 40-digit evaluation
        assert!((erfi(3.0).unwrap() / 1629.994622601565651 - 1.0).abs() < 1e-14);
        assert!((erfi(8.0).unwrap() / 4.432449746002334632e26 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_cdf_on_imaginary_axis() {
        let z = std_normal_cdf_imag(0.0).unwrap();
        assert_eq!(z, Complex64::new(0.5, 0.0));
        for t in [0.3, 1.0, 4.0] {
            assert_eq!(std_normal_cdf_imag(-t).unwrap(), std_normal_cdf_imag(t).unwrap().conj());
        }
        let one = std_normal_cdf_imag(1.0).unwrap();
        assert!((one.im - 0.5 * erfi(1.0 / std::f64::consts::SQRT_2).unwrap()).abs() < 1e-16);
        assert!((one.im - 0.5 * 0.9534382692512608390).abs() < 1e-15);
    }

    #[test]
    fn complex_field_axioms() {
        let a = Complex64::new(0.3, -1.2);
        let b = Complex64::new(-2.5, 0.7);
        let c = Complex64::new(1.1, 4.0);
        let eps = 1e-14;
        assert!(((a + b) * c - (a * c + b * c)).norm() < eps);
        assert!((a * b - b * a).norm() == 0.0);
        assert!((a * (b * c) - (a * b) * c).norm() < eps);
        assert!((a / a - Complex64::new(1.0, 0.0)).norm() < eps);
    }

    #[test]
    fn rayleigh_charfn_limit_at_zero() {
        assert_eq!(rayleigh_charfn(0.0).unwrap(), Complex64::new(1.0, 0.0));
    }
}
