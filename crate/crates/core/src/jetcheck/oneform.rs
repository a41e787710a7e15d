use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fluid::Eos;

use super::JetPoint;

/// D_t(dα) + d(u⌟dα) for α = u♭ at an order-2 jet, with ∂_t u eliminated through the
/// momentum equation. Returns the antisymmetric (j, i) component matrix.
pub fn oneform_residual(jet: &JetPoint, eos: &Eos) -> Result<DMatrix<f64>> {
    let sec = jet
        .second
        .as_ref()
        .ok_or_else(|| Error::Numeric("circulation residual needs a second-order jet".into()))?;
    let n = jet.dim();
    let g = &jet.geom.g;
    let rho = jet.rho;
    let u = &jet.u;
    let p = eos.jet(rho, jet.s);
    let (dr, ds) = (&jet.grad_rho, &jet.grad_s);

    // (j, i) = ∇_j u_i
    let du_low = DMatrix::from_fn(n, n, |j, i| (0..n).map(|l| g[(i, l)] * jet.grad_u[(l, j)]).sum::<f64>());
    // ∇_k∇_j u_i
    let hess_low = |i: usize, k: usize, j: usize| -> f64 { (0..n).map(|l| g[(i, l)] * sec.hess_u[(l * n + k) * n + j]).sum() };
    let omega = DMatrix::from_fn(n, n, |j, i| du_low[(j, i)] - du_low[(i, j)]);

    // ∇_j a_i with a_i = −u^k∇_k u_i − ρ⁻¹(P_ρ∇_iρ + P_S∇_iS)
    let grad_a = DMatrix::from_fn(n, n, |j, i| {
        let mut v = 0.0;
        for k in 0..n {
            v -= jet.grad_u[(k, j)] * du_low[(k, i)];
            v -= u[k] * hess_low(i, j, k);
        }
        v -= (-dr[j] * p.p_r * dr[i] / rho + (p.p_rr * dr[j] + p.p_rs * ds[j]) * dr[i] + p.p_r * sec.hess_rho[(j, i)]) / rho;
        v -= (-dr[j] * p.p_s * ds[i] / rho + (p.p_rs * dr[j] + p.p_ss * ds[j]) * ds[i] + p.p_s * sec.hess_s[(j, i)]) / rho;
        v
    });

    Ok(DMatrix::from_fn(n, n, |j, i| {
        let mut v = grad_a[(j, i)] - grad_a[(i, j)];
        for k in 0..n {
            let dk_omega = hess_low(i, k, j) - hess_low(j, k, i);
            v += u[k] * dk_omega;
            v += omega[(k, i)] * jet.grad_u[(k, j)] + omega[(j, k)] * jet.grad_u[(k, i)];
        }
        v
    }))
}

/// Closed form ρ⁻²P_S(∇_jρ∇_iS − ∇_iρ∇_jS) the residual reduces to.
pub fn oneform_reduced(jet: &JetPoint, eos: &Eos) -> DMatrix<f64> {
    let n = jet.dim();
    let p = eos.jet(jet.rho, jet.s);
    let c = p.p_s / (jet.rho * jet.rho);
    DMatrix::from_fn(n, n, |j, i| c * (jet.grad_rho[j] * jet.grad_s[i] - jet.grad_rho[i] * jet.grad_s[j]))
}
