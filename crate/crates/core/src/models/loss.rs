//! Loss functions with analytic gradients, kept standalone so they can be
//! checked against finite differences.

use crate::scalar::Scalar;

/// Numerically stable logistic function.
pub fn sigmoid<F: Scalar>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus<F: Scalar>(t: F) -> F {
    t.max(F::zero()) + (-t.abs()).exp().ln_1p()
}

/// Sigmoid cross entropy with a positive-class weight:
/// `L = pos_weight * y * ln(1 + e^-z) + (1 - y) * ln(1 + e^z)`.
pub fn weighted_sigmoid_ce<F: Scalar>(z: F, target: bool, pos_weight: F) -> F {
    if target {
        pos_weight * softplus(-z)
    } else {
        softplus(z)
    }
}

/// `dL/dz` of [`weighted_sigmoid_ce`].
pub fn weighted_sigmoid_ce_grad<F: Scalar>(z: F, target: bool, pos_weight: F) -> F {
    if target {
        -pos_weight * (F::one() - sigmoid(z))
    } else {
        sigmoid(z)
    }
}

/// L2-regularized hinge loss of a linear score on one example:
/// `L = lambda/2 * |w|^2 + max(0, 1 - y * (w.x + b))` with `y in {-1, +1}`.
pub fn hinge_loss<F: Scalar>(w: &[F], bias: F, x: &[F], y: F, lambda: F) -> F {
    let score = w.iter().zip(x).fold(bias, |acc, (&wi, &xi)| acc + wi * xi);
    let margin = F::one() - y * score;
    let reg = w.iter().fold(F::zero(), |a, &wi| a + wi * wi);
    lambda / F::from_f64_lossy(2.0) * reg + margin.max(F::zero())
}

/// Subgradient of [`hinge_loss`] with respect to `(w, bias)`.
pub fn hinge_grad<F: Scalar>(w: &[F], bias: F, x: &[F], y: F, lambda: F) -> (Vec<F>, F) {
    let score = w.iter().zip(x).fold(bias, |acc, (&wi, &xi)| acc + wi * xi);
    let violated = F::one() - y * score > F::zero();
    let mut gw: Vec<F> = w.iter().map(|&wi| lambda * wi).collect();
    let mut gb = F::zero();
    if violated {
        for (g, &xi) in gw.iter_mut().zip(x) {
            *g = *g - y * xi;
        }
        gb = -y;
    }
    (gw, gb)
}
