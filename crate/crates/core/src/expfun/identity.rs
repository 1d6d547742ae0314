//! The identity I₁(s) + I₂(s) = M_{x,q}(s) behind the density formula, assembled from its
//! hypergeometric building blocks, and the reduced ₄F₄ bilinear identity H(x) = 0 it rests on.
//! Both are numerical verifiers: a small residual certifies roots, series and coefficients at
//! once.

use num_complex::Complex64;

use super::{cpow, mellin_continued, mellin_parts, ExpFunctionalQuery};
use crate::error::Result;
use crate::kou::{psi_prime, Root};
use crate::specfun::gamma::gamma_ratio_entire;
use crate::specfun::{hyper_pfq, hyper_pfq_regularized, sin_pi};

type C = Complex64;

/// |I₁(s) + I₂(s) − M_{x,q}(s)| / (1 + |M_{x,q}(s)|).
pub fn appendix_b_residual(query: &ExpFunctionalQuery, s: C) -> Result<f64> {
    let rs = &query.roots;
    let (z1, z2, h1, h2) = (rs.zeta1, rs.zeta2, rs.zeta_hat1, rs.zeta_hat2);
    let (rho, rho_hat, q, x) = (rs.rho, rs.rho_hat, rs.q, query.x);
    let ax = query.ax();
    let big_x = C::new(-1.0 / ax, 0.0);

    // Regularized ₄Φ₄ at −1/(Ax) around the positive roots (f₆, f₇) and the negative ones (f₈, f₉).
    let f_pos = |za: C, zb: C| {
        hyper_pfq_regularized(
            &[1.0 + za + rho_hat, 1.0 + za, 1.0 + za - rho, 1.0 + za - s],
            &[2.0 + za - s, 1.0 + za - zb, 1.0 + za + h1, 1.0 + za + h2],
            big_x,
        )
    };
    let f_neg = |ha: C, hb: C| {
        hyper_pfq_regularized(
            &[1.0 + rho_hat - ha, 1.0 - ha, 1.0 - rho - ha, 1.0 - s - ha],
            &[2.0 - ha - s, 1.0 - ha - z1, 1.0 - ha - z2, 1.0 + hb - ha],
            big_x,
        )
    };
    let f6 = f_pos(z1, z2)?;
    let f7 = f_pos(z2, z1)?;
    let f8 = f_neg(h1, h2)?;
    let f9 = f_neg(h2, h1)?;

    // d₁..d₄ for ζ̂₁; e₁..e₄ are the same with ζ̂₁ and ζ̂₂ exchanged.
    let d = |ha: C, hb: C| -> Result<[C; 4]> {
        let d1 = -sin_pi(z1) * sin_pi(rho - z1) / (sin_pi(z2 - z1) * sin_pi(ha + z1)) * cpow(ax, -z1 - 1.0);
        let d2 = -sin_pi(z2) * sin_pi(rho - z2) / (sin_pi(z1 - z2) * sin_pi(ha + z2)) * cpow(ax, -z2 - 1.0);
        let d3 = -sin_pi(ha) * sin_pi(rho + ha) / (sin_pi(z1 + ha) * sin_pi(z2 + ha)) * cpow(ax, ha - 1.0);
        let d4 = gamma_ratio_entire(
            &[1.0 + z1 - s, 1.0 + z2 - s, 1.0 - ha - s, s + rho_hat],
            &[s + hb, 1.0 - s, 1.0 + rho - s],
        )? * cpow(ax, -s);
        Ok([d1, d2, d3, d4])
    };
    let [d1, d2, d3, d4] = d(h1, h2)?;
    let [e1, e2, e3, e4] = d(h2, h1)?;

    // h₁f₂ = q x^s ℓ₁ and h₂f₃ = q x^s ℓ₂ with ℓ the cached left coefficients.
    let [l1, l2] = query.left_coefficients()?;
    let xs = cpow(x, s);
    let h1f2 = q * xs * l1;
    let h2f3 = q * xs * l2;
    let i1 = h1f2 * d4 + h2f3 * e4 + h1f2 * d1 * f6 + h1f2 * d2 * f7 + h1f2 * d3 * f8 + h2f3 * e1 * f6
        + h2f3 * e2 * f7
        + h2f3 * e3 * f9;

    let g = |za: C, zb: C, at: Root| -> Result<C> {
        Ok(psi_prime(rs, at).inv() * cpow(x, s - 1.0 - za) / (1.0 + za - s)
            * gamma_ratio_entire(
                &[2.0 + za - s, 1.0 + za - zb, 1.0 + za + h1, 1.0 + za + h2],
                &[1.0 + za + rho_hat, 1.0 + za, 1.0 + za - rho, 1.0 + za - s],
            )?)
    };
    let g1 = g(z1, z2, Root::Zeta1)?;
    let g2 = g(z2, z1, Root::Zeta2)?;
    let [b1f4, b2f2, b3f3] = mellin_parts(query, z1)?;
    let [c1f5, c2f2, c3f3] = mellin_parts(query, z2)?;
    let i2 = q * cpow(x, z1) * g1 * f6
        + q * cpow(x, z2) * g2 * f7
        + z1 * b1f4 * g1 * f6
        + z1 * b2f2 * g1 * f6
        + z1 * b3f3 * g1 * f6
        + z2 * c1f5 * g2 * f7
        + z2 * c2f2 * g2 * f7
        + z2 * c3f3 * g2 * f7;

    let m = mellin_continued(query, s)?;
    Ok((i1 + i2 - m).norm() / (1.0 + m.norm()))
}

/// |H| / Σ|terms of H| for
/// H = Σᵢ (αᵢ−ρ)(αᵢ+ρ̂)/∏_{j≠i}(αᵢ−αⱼ) · ₄F₄(1+αᵢ−ρ, 1+αᵢ+ρ̂, 1+αᵢ, 1+αᵢ−s; 1+αᵢ−αⱼ | −X)
///     · ₄F₄(1+ρ−αᵢ, 1−ρ̂−αᵢ, −αᵢ, s−αᵢ; 1+αⱼ−αᵢ | X),
/// α = (ζ₁, ζ₂, −ζ̂₁, −ζ̂₂, s−1), X = 1/(Ax).
pub fn h_identity_residual(query: &ExpFunctionalQuery, s: C) -> Result<f64> {
    let rs = &query.roots;
    let (rho, rho_hat) = (rs.rho, rs.rho_hat);
    let x = 1.0 / query.ax();
    let alpha = [rs.zeta1, rs.zeta2, -rs.zeta_hat1, -rs.zeta_hat2, s - 1.0];
    let mut total = C::new(0.0, 0.0);
    let mut scale = 0.0;
    for (i, &ai) in alpha.iter().enumerate() {
        let others: Vec<C> = alpha.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &a)| a).collect();
        let prod: C = others.iter().map(|&aj| ai - aj).product();
        let down: Vec<C> = others.iter().map(|&aj| 1.0 + ai - aj).collect();
        let up: Vec<C> = others.iter().map(|&aj| 1.0 + aj - ai).collect();
        let f = hyper_pfq(&[1.0 + ai - rho, 1.0 + ai + rho_hat, 1.0 + ai, 1.0 + ai - s], &down, C::new(-x, 0.0))?;
        let g = hyper_pfq(&[1.0 + rho - ai, 1.0 - rho_hat - ai, -ai, s - ai], &up, C::new(x, 0.0))?;
        let term = (ai - rho) * (ai + rho_hat) / prod * f * g;
        total += term;
        scale += term.norm();
    }
    Ok(total.norm() / scale)
}
