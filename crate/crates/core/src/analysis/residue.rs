use num_complex::Complex64;

use super::Pole;
use crate::error::{Error, Result};

const MAX_NODES: usize = 1 << 15;

/// `(1/2πi) ∮ f dz` on `|z − c| = r` by the trapezoid rule, doubling the node count
/// until successive values agree to 10⁻¹² relative, with a round-off floor of
/// 10⁻¹⁴·r·max|f| for integrals that vanish.
pub fn residue_at<F: Fn(Complex64) -> Complex64>(f: &F, c: Complex64, r: f64) -> Result<Complex64> {
    let mut n = 32;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut fmax: f64 = 0.0;
    let tau = 2.0 * std::f64::consts::PI;
    // First pass: n nodes; later passes only add the odd nodes of the refined grid.
    for k in 0..n {
        let e = Complex64::from_polar(1.0, tau * k as f64 / n as f64);
        let v = f(c + e * r);
        fmax = fmax.max(v.norm());
        sum += v * e;
    }
    let mut prev = sum * (r / n as f64);
    while n < MAX_NODES {
        for k in 0..n {
            let e = Complex64::from_polar(1.0, tau * (2 * k + 1) as f64 / (2 * n) as f64);
            let v = f(c + e * r);
            fmax = fmax.max(v.norm());
            sum += v * e;
        }
        n *= 2;
        let cur = sum * (r / n as f64);
        if !(cur.re.is_finite() && cur.im.is_finite()) {
            return Err(Error::Residue(format!("non-finite samples on circle |z-{c}|={r}")));
        }
        if (cur - prev).norm() <= 1e-12 * cur.norm() + 1e-14 * r * fmax {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Residue(format!("trapezoid rule did not converge on |z-{c}|={r}")))
}

/// Residue of `f` at each pole (or cluster). Circles are centred on the reported
/// positions with radius `min(radius, 0.45 × distance to the nearest other pole)`;
/// a failing circle is shrunk by half up to six times.
pub fn residues<F: Fn(Complex64) -> Complex64>(f: &F, poles: &[Pole], radius: f64) -> Result<Vec<Complex64>> {
    poles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let nearest = poles
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| (q.position - p.position).norm())
                .fold(f64::INFINITY, f64::min);
            let mut r = radius.min(0.45 * nearest);
            let mut last = None;
            for _ in 0..=6 {
                match residue_at(f, p.position, r) {
                    Ok(v) => return Ok(v),
                    Err(e) => last = Some(e),
                }
                r *= 0.5;
            }
            Err(last.unwrap_or_else(|| Error::Residue("no attempt".into())))
        })
        .collect()
}

/// `Σ_k Res[f, z_k]`, accumulated in (Im, Re) order of the pole positions.
pub fn residue_sum<F: Fn(Complex64) -> Complex64>(f: &F, poles: &[Pole], radius: f64) -> Result<Complex64> {
    let mut sorted = poles.to_vec();
    super::sort_poles(&mut sorted);
    Ok(residues(f, &sorted, radius)?.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn defining_cases() {
        let zero = c(0.0, 0.0);
        assert!((residue_at(&|z: Complex64| z.inv(), zero, 0.5).unwrap() - 1.0).norm() < 1e-14);
        assert!(residue_at(&|z: Complex64| z.powi(-2), zero, 0.5).unwrap().norm() < 1e-14);
    }

    #[test]
    fn csch2_times_oscillation_at_2pi_i() {
        // e^{−iΩz}/sinh²(z/2) near 2πi: sinh²(z/2) = (ζ/2)²(1 + ζ²/12 + …), ζ = z − 2πi,
        // so the residue is 4·d/dζ e^{−iΩ(2πi+ζ)} at 0 = −4iΩ e^{2πΩ}.
        let om = 1.0;
        let f = move |z: Complex64| (Complex64::new(0.0, -om) * z).exp() / (z * 0.5).sinh().powi(2);
        let v = residue_at(&f, c(0.0, 2.0 * PI), 1.0).unwrap();
        let expect = c(0.0, -4.0 * om * (2.0 * PI * om).exp());
        assert!((v - expect).norm() < 1e-10 * expect.norm());
    }

    #[test]
    fn additivity_against_enclosing_contour() {
        let f = |z: Complex64| (z * z + 1.0) / ((z - c(0.3, 0.2)) * (z + c(0.4, -0.1)).powi(2) * (z - c(0.0, -0.5)));
        let poles: Vec<Pole> = [(c(0.3, 0.2), 1), (c(-0.4, 0.1), 2), (c(0.0, -0.5), 1)]
            .iter()
            .map(|&(p, m)| Pole::new(p, m))
            .collect();
        let parts = residue_sum(&f, &poles, 1.0).unwrap();
        let big = residue_at(&f, c(0.0, 0.0), 3.0).unwrap();
        assert!((parts - big).norm() < 1e-10 * big.norm().max(1.0));
    }
}
