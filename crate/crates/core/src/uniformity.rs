//! U^d products, convolutions, seminorms and Fourier σ-algebras over a cubic coupling.

use crate::cubic::CubicCoupling;
use crate::cube::Vertex;
use crate::error::{Error, Result};
use crate::measure::{cond_expect, FunctionOnSpace, Partition};
use crate::scalar::Scalar;
use num_traits::Zero;

fn check_system<S: Scalar>(fs: &[FunctionOnSpace<S>], expected: usize, base_len: usize) -> Result<()> {
    if fs.len() != expected {
        return Err(Error::Misaligned(format!("{} functions given, {} needed", fs.len(), expected)));
    }
    if fs.iter().any(|f| f.len() != base_len) {
        return Err(Error::Misaligned("function defined on a different space".into()));
    }
    Ok(())
}

/// `⟨(f_v)⟩_{U^d} = ∫ ∏ C^{|v|} f_v ∘ p_v dμ^⟦d⟧`, with `fs` in vertex mask order.
pub fn u_product<S: Scalar>(cc: &CubicCoupling, d: usize, fs: &[FunctionOnSpace<S>]) -> Result<S> {
    let mu = cc.level(d)?;
    check_system(fs, 1 << d, cc.base().len())?;
    let adjusted: Vec<FunctionOnSpace<S>> = Vertex::all(d)?
        .iter()
        .zip(fs)
        .map(|(v, f)| if v.height() % 2 == 1 { f.conj() } else { f.clone() })
        .collect();
    mu.xi(&adjusted)
}

/// `‖f‖_{U^d}^{2^d}`, checked to be a nonnegative real.
pub fn u_seminorm_pow<S: Scalar>(cc: &CubicCoupling, d: usize, f: &FunctionOnSpace<S>) -> Result<S> {
    let fs = vec![f.clone(); 1 << d];
    let v = u_product(cc, d, &fs)?;
    if !v.is_real_nonneg() {
        return Err(Error::NegativeSeminorm(format!("{:?}", v)));
    }
    Ok(v)
}

/// `‖f‖_{U^d}` as a float, for display.
pub fn u_seminorm<S: Scalar>(cc: &CubicCoupling, d: usize, f: &FunctionOnSpace<S>) -> Result<f64> {
    Ok(display_root(&u_seminorm_pow(cc, d, f)?, d))
}

/// `[F]_{U^d}(x)`: the average of `∏_{v ∈ K_d} C^{|v|+1} f_v` over cubes rooted at `x`.
/// `corner` lists the functions on `K_d` in mask order.
pub fn u_convolution<S: Scalar>(cc: &CubicCoupling, d: usize, corner: &[FunctionOnSpace<S>]) -> Result<FunctionOnSpace<S>> {
    let mu = cc.level(d)?;
    let base = cc.base();
    check_system(corner, (1 << d) - 1, base.len())?;
    let heights: Vec<usize> = Vertex::corner(d)?.iter().map(|v| v.height()).collect();
    let mut acc = vec![S::zero(); base.len()];
    for (t, m) in mu.iter() {
        let prod = corner.iter().enumerate().fold(S::one(), |p, (i, f)| {
            p.mul(&f.values[t[i + 1] as usize].conj_pow(heights[i] + 1))
        });
        let x = t[0] as usize;
        acc[x] = acc[x].add(&prod.scale(m));
    }
    let values = acc
        .into_iter()
        .enumerate()
        .map(|(x, s)| if base.weight(x).is_zero() { S::zero() } else { s.div_q(base.weight(x)) })
        .collect();
    Ok(FunctionOnSpace::new(values))
}

/// `F_{d-1}`: the meet of the root and corner σ-algebras of `μ^⟦d⟧`, pushed to the base.
pub fn fourier_factor(cc: &CubicCoupling, d: usize) -> Result<Partition> {
    if d == 0 {
        return Err(Error::InvalidEntry("the Fourier factor needs d ≥ 1".into()));
    }
    let mu = cc.level(d)?;
    let corner: Vec<usize> = (1..1usize << d).collect();
    let m = mu.cylinder_partition(&[0]).meet(&mu.cylinder_partition(&corner))?;
    Ok(m.push_forward(cc.base(), |i| mu.tuples()[i][0] as usize))
}

/// Whether `‖f‖_{U^d} = 0` exactly when `E(f | F_{d-1}) = 0`.
pub fn zero_norm_projection_check<S: Scalar>(cc: &CubicCoupling, d: usize, f: &FunctionOnSpace<S>) -> Result<bool> {
    let norm_zero = u_seminorm_pow(cc, d, f)?.is_zero();
    let projection_zero = cond_expect(cc.base(), f, &fourier_factor(cc, d)?)?.is_null(cc.base());
    Ok(norm_zero == projection_zero)
}

/// `|⟨F⟩_{U^d}|^{2^d} ≤ ∏_v ‖f_v‖_{U^d}^{2^d}`, compared in powered form.
pub fn gowers_cauchy_schwarz<S: Scalar>(cc: &CubicCoupling, d: usize, fs: &[FunctionOnSpace<S>]) -> Result<bool> {
    if d == 0 {
        return Err(Error::InvalidEntry("Gowers–Cauchy–Schwarz needs d ≥ 1".into()));
    }
    let lhs = u_product(cc, d, fs)?.norm_sqr().pow(1 << (d - 1));
    let rhs = fs.iter().try_fold(S::one(), |acc, f| u_seminorm_pow(cc, d, f).map(|p| acc.mul(&p)))?;
    Ok(lhs.real_le(&rhs))
}

/// `‖f‖_{U^d}^{2^{d+1}} ≤ ‖f‖_{U^{d+1}}^{2^{d+1}}`.
pub fn seminorm_monotone<S: Scalar>(cc: &CubicCoupling, d: usize, f: &FunctionOnSpace<S>) -> Result<bool> {
    let lower = u_seminorm_pow(cc, d, f)?;
    let upper = u_seminorm_pow(cc, d + 1, f)?;
    Ok(lower.mul(&lower).real_le(&upper))
}

/// Checks `(F_{d-1})_{0^d} = A_{0^d} ∧ (F_{d-1})_{K_d}` in `μ^⟦d⟧`.
pub fn fourier_meet_with_factor(cc: &CubicCoupling, d: usize) -> Result<bool> {
    let factor = fourier_factor(cc, d)?;
    let mu = cc.level(d)?;
    let space = mu.support_space();
    let block = |x: u32| factor.block_of(x as usize).expect("support root");
    let root_factor = Partition::from_keys(&space, |i| block(mu.tuples()[i][0]));
    let corner_factor =
        Partition::from_keys(&space, |i| mu.tuples()[i][1..].iter().map(|&x| block(x)).collect::<Vec<_>>());
    Ok(root_factor == mu.cylinder_partition(&[0]).meet(&corner_factor)?)
}

/// The powered seminorm as a float root.
pub fn display_root<S: Scalar>(powered: &S, d: usize) -> f64 {
    powered.to_c64().re.max(0.0).powf(1.0 / f64::from(1u32 << d))
}
