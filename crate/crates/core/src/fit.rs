//! Log-log slope fits and two-point Richardson extrapolation.

use num_complex::Complex64;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// False when the fit is undefined (fewer than two points, or a
    /// nonpositive `y`); `slope` is NaN in that case.
    pub defined: bool,
}

impl SlopeFit {
    fn undefined() -> Self {
        SlopeFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            defined: false,
        }
    }
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> SlopeFit {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 || xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return SlopeFit::undefined();
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return SlopeFit::undefined();
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    SlopeFit {
        slope,
        intercept: my - slope * mx,
        defined: true,
    }
}

/// Eliminate a known `C lambda^{-delta}` error term from two estimates taken
/// at `lambda_a < lambda_b`.
pub fn richardson(
    lambda_a: f64,
    est_a: Complex64,
    lambda_b: f64,
    est_b: Complex64,
    delta: f64,
) -> Complex64 {
    let wa = lambda_a.powf(delta);
    let wb = lambda_b.powf(delta);
    (est_b * wb - est_a * wa) / (wb - wa)
}
