use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numeric::golden_max;
use crate::{Error, Result};

pub type C64 = Complex64;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to `−EIGEN_FLOOR` count as zero.
pub const EIGEN_FLOOR: f64 = 1e-9;

/// Two-qubit polarization state in the `{HH, HV, VH, VV}` basis, signal first.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Matrix4<C64>);

/// Basis index of `|HV⟩`.
pub const HV: usize = 1;
/// Basis index of `|VH⟩`.
pub const VH: usize = 2;

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (up to the floor).
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let rho = Self(m);
        rho.check_hermitian_trace()?;
        let min = rho.min_eigenvalue();
        if min < -EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    /// Wraps a Hermitian, unit-trace matrix that may have negative eigenvalues.
    pub fn new_unphysical(m: Matrix4<C64>) -> Result<Self> {
        let rho = Self(m);
        rho.check_hermitian_trace()?;
        Ok(rho)
    }

    fn check_hermitian_trace(&self) -> Result<()> {
        let m = &self.0;
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(herm <= HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = m.trace();
        if !((tr.re - 1.0).abs() <= TRACE_TOL && tr.im.abs() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(())
    }

    /// Projector onto a normalized pure state.
    pub fn pure(psi: &Vector4<C64>) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("state norm {n} is not 1")));
        }
        Self::new(psi * psi.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity() * C64::new(0.25, 0.0))
    }

    /// `p|Ψ⁺⟩⟨Ψ⁺| + (1 − p)I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("Werner weight {p} outside [0, 1]")));
        }
        let psi = bell_hv(0.0);
        Self::new(psi * psi.adjoint() * C64::new(p, 0.0) + Matrix4::identity() * C64::new(0.25 * (1.0 - p), 0.0))
    }

    /// `V|ψ(φ)⟩⟨ψ(φ)| + (1 − V)(|HV⟩⟨HV| + |VH⟩⟨VH|)/2`: an `|HV⟩`/`|VH⟩`
    /// pair state whose coherence, and concurrence, equals `V`.
    pub fn dephased_pair(visibility: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidInput(format!("visibility {visibility} outside [0, 1]")));
        }
        let mut m = Matrix4::zeros();
        m[(HV, HV)] = C64::new(0.5, 0.0);
        m[(VH, VH)] = C64::new(0.5, 0.0);
        m[(VH, HV)] = C64::from_polar(0.5 * visibility, phase);
        m[(HV, VH)] = m[(VH, HV)].conj();
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vector4<f64> {
        let mut e = self.0.symmetric_eigenvalues();
        e.as_mut_slice().sort_by(f64::total_cmp);
        e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -EIGEN_FLOOR
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Clips eigenvalues in `[−floor, 0)` to zero and renormalizes; fails on
    /// anything more negative.
    pub fn floored(&self) -> Result<Self> {
        let eig = self.0.symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l < -EIGEN_FLOOR) {
            return Err(Error::InvalidState(format!(
                "eigenvalue {:.3e} below the floor",
                eig.eigenvalues.min()
            )));
        }
        Ok(Self(clip_and_rebuild(&eig, 0.0)))
    }

    /// Nearest state with eigenvalues ≥ 0 (negative ones set to zero), mixed
    /// with `eps` of white noise.
    pub fn regularized(&self, eps: f64) -> Self {
        let eig = self.0.symmetric_eigen();
        let m = clip_and_rebuild(&eig, 0.0);
        Self(m * C64::new(1.0 - eps, 0.0) + Matrix4::identity() * C64::new(0.25 * eps, 0.0))
    }

    /// Applies local unitaries `(U_s ⊗ U_i) ρ (U_s ⊗ U_i)†`.
    pub fn transformed(&self, u: &Matrix4<C64>) -> Self {
        Self(u * self.0 * u.adjoint())
    }
}

fn clip_and_rebuild(eig: &nalgebra::SymmetricEigen<C64, nalgebra::U4>, floor: f64) -> Matrix4<C64> {
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(floor)).collect();
    let total: f64 = vals.iter().sum();
    let mut m = Matrix4::zeros();
    for (k, v) in vals.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        m += col * col.adjoint() * C64::new(v / total, 0.0);
    }
    // exact Hermiticity
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `(|HV⟩ + e^{iφ}|VH⟩)/√2`.
pub fn bell_hv(phase: f64) -> Vector4<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = Vector4::zeros();
    v[HV] = C64::new(s, 0.0);
    v[VH] = C64::from_polar(s, phase);
    v
}

/// `σ_y ⊗ σ_y`.
fn sigma_yy() -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    // ⟨HH|VV⟩ block: (−i)(−i) = −1, ⟨HV|VH⟩: (−i)(i) = 1
    m[(0, 3)] = C64::new(-1.0, 0.0);
    m[(3, 0)] = C64::new(-1.0, 0.0);
    m[(1, 2)] = C64::new(1.0, 0.0);
    m[(2, 1)] = C64::new(1.0, 0.0);
    m
}

/// Spin-flipped state `(σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn spin_flip(rho: &DensityMatrix) -> Matrix4<C64> {
    let y = sigma_yy();
    y * rho.0.conjugate() * y
}

/// Hermitian square root of a positive semidefinite matrix.
fn psd_sqrt(m: &Matrix4<C64>) -> Matrix4<C64> {
    let eig = m.symmetric_eigen();
    let mut r = Matrix4::zeros();
    for k in 0..4 {
        let col = eig.eigenvectors.column(k);
        r += col * col.adjoint() * C64::new(eig.eigenvalues[k].max(0.0).sqrt(), 0.0);
    }
    r
}

/// Wootters concurrence, from the eigenvalues of the Hermitian matrix
/// `√ρ ρ̃ √ρ`, which share their values with `ρρ̃`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let rho = rho.floored()?;
    let s = psd_sqrt(&rho.0);
    let m = s * spin_flip(&rho) * s;
    let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut l: Vec<f64> = m.symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
pub fn fidelity_to_pure(rho: &DensityMatrix, psi: &Vector4<C64>) -> Result<f64> {
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("target state norm {n} is not 1")));
    }
    let f = (psi.adjoint() * rho.0 * psi)[(0, 0)];
    if f.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!("fidelity has imaginary part {}", f.im)));
    }
    Ok(f.re)
}

/// Maximum of `⟨ψ(φ)|ρ|ψ(φ)⟩` over `ψ(φ) = (|HV⟩ + e^{iφ}|VH⟩)/√2`, by a
/// 720-point scan refined with golden-section search. Returns `(F, φ)` with
/// `φ ∈ [0, 2π)`; a flat profile returns `φ = 0`.
pub fn best_maximally_entangled_fidelity(rho: &DensityMatrix) -> (f64, f64) {
    let m = &rho.0;
    let base = 0.5 * (m[(HV, HV)].re + m[(VH, VH)].re);
    let c = m[(HV, VH)];
    let f = |phi: f64| base + (c * C64::from_polar(1.0, phi)).re;
    let n = 720;
    let two_pi = 2.0 * std::f64::consts::PI;
    let samples: Vec<(f64, f64)> = (0..n).map(|k| {
        let p = two_pi * k as f64 / n as f64;
        (p, f(p))
    }).collect();
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.1), b.max(s.1)));
    if hi - lo < 1e-12 {
        return (f(0.0), 0.0);
    }
    let best = samples.iter().cloned().fold((0.0, f64::NEG_INFINITY), |a, s| if s.1 > a.1 { s } else { a });
    let step = two_pi / n as f64;
    let (phi, val) = golden_max(f, best.0 - step, best.0 + step, 1e-9);
    (val, phi.rem_euclid(two_pi))
}

#[derive(Serialize, Deserialize)]
struct ReIm {
    re: [[f64; 4]; 4],
    im: [[f64; 4]; 4],
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut r = ReIm { re: [[0.0; 4]; 4], im: [[0.0; 4]; 4] };
        for i in 0..4 {
            for j in 0..4 {
                r.re[i][j] = self.0[(i, j)].re;
                r.im[i][j] = self.0[(i, j)].im;
            }
        }
        r.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ReIm::deserialize(d)?;
        let m = Matrix4::from_fn(|i, j| C64::new(r.re[i][j], r.im[i][j]));
        DensityMatrix::new_unphysical(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Trace-one `G G†` with complex Gaussian-like `G`.
    pub(crate) fn random_state(rng: &mut impl Rng) -> DensityMatrix {
        let g = Matrix4::from_fn(|_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = g * g.adjoint();
        let tr = m.trace();
        let m = m / tr;
        DensityMatrix::new((m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()
    }

    // Oracle: λᵢ from the (non-Hermitian) eigenvalues of ρρ̃ via a complex Schur form.
    fn concurrence_oracle(rho: &DensityMatrix) -> f64 {
        let prod = rho.matrix() * spin_flip(rho);
        let schur = nalgebra::Schur::new(prod);
        let (_, t) = schur.unpack();
        let mut l: Vec<f64> = (0..4).map(|k| t[(k, k)].re.max(0.0).sqrt()).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        (l[0] - l[1] - l[2] - l[3]).max(0.0)
    }

    fn random_unitary2(rng: &mut impl Rng) -> Matrix2<C64> {
        let (a, b, c, d) = (rng.random::<f64>() * 6.3, rng.random::<f64>() * 6.3, rng.random::<f64>() * 6.3, rng.random::<f64>() * 1.6);
        let e = |x: f64| C64::from_polar(1.0, x);
        Matrix2::new(e(a) * d.cos(), e(b) * d.sin(), -e(c - b) * d.sin(), e(c - a) * d.cos()) * e(0.1)
    }

    #[test]
    fn concurrence_reference_states() {
        assert!((concurrence(&DensityMatrix::pure(&bell_hv(0.0)).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!(concurrence(&DensityMatrix::maximally_mixed()).unwrap().abs() < 1e-12);
        let w = DensityMatrix::werner(0.5).unwrap();
        assert!((concurrence(&w).unwrap() - 0.25).abs() < 1e-12);
        assert!((concurrence(&w).unwrap() - concurrence_oracle(&w)).abs() < 1e-12);
        let d = DensityMatrix::dephased_pair(0.957, 0.4).unwrap();
        assert!((concurrence(&d).unwrap() - 0.957).abs() < 1e-12);
    }

    #[test]
    fn concurrence_matches_schur_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let r = random_state(&mut rng);
            let (a, b) = (concurrence(&r).unwrap(), concurrence_oracle(&r));
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn concurrence_is_local_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let r = DensityMatrix::werner(0.8).unwrap().transformed(&Matrix4::identity());
            let r = if rng.random::<bool>() { r } else { random_state(&mut rng) };
            let u = random_unitary2(&mut rng).kronecker(&random_unitary2(&mut rng));
            assert!((u * u.adjoint() - Matrix4::identity()).norm() < 1e-12);
            let a = concurrence(&r).unwrap();
            let b = concurrence(&r.transformed(&u)).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn fidelity_reference_values() {
        let psi = bell_hv(0.0);
        assert!((fidelity_to_pure(&DensityMatrix::pure(&psi).unwrap(), &psi).unwrap() - 1.0).abs() < 1e-14);
        assert!((fidelity_to_pure(&DensityMatrix::maximally_mixed(), &bell_hv(1.0)).unwrap() - 0.25).abs() < 1e-14);
        let w = DensityMatrix::werner(0.95).unwrap();
        // direct matrix elements: p/2·(1 + 1)/... = (3p + 1)/4
        let m = w.matrix();
        let direct = 0.5 * (m[(HV, HV)] + m[(VH, VH)] + m[(HV, VH)] + m[(VH, HV)]).re;
        assert!((direct - 0.9625).abs() < 1e-14);
        assert!((fidelity_to_pure(&w, &psi).unwrap() - direct).abs() < 1e-14);
        assert!(fidelity_to_pure(&w, &(psi * C64::new(2.0, 0.0))).is_err());
    }

    #[test]
    fn best_phase() {
        let minus = DensityMatrix::pure(&bell_hv(std::f64::consts::PI)).unwrap();
        let (f, phi) = best_maximally_entangled_fidelity(&minus);
        assert!((f - 1.0).abs() < 1e-12 && (phi - std::f64::consts::PI).abs() < 1e-4);
        let (f, phi) = best_maximally_entangled_fidelity(&DensityMatrix::maximally_mixed());
        assert!((f - 0.25).abs() < 1e-14 && phi == 0.0);
        let r = DensityMatrix::pure(&bell_hv(0.3)).unwrap();
        let (f, phi) = best_maximally_entangled_fidelity(&r);
        assert!((phi - 0.3).abs() < 1e-4 && (f - 1.0).abs() < 1e-12);
        // closed-form overlap cos²((φ − φ₀)/2)
        let g = fidelity_to_pure(&r, &bell_hv(1.0)).unwrap();
        assert!((g - (0.35f64).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let mut m = *DensityMatrix::maximally_mixed().matrix();
        m[(0, 1)] = C64::new(0.0, 1e-6);
        assert!(DensityMatrix::new(m).is_err());
        let m = Matrix4::identity() * C64::new(0.3, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::new(1.2, 0.0);
        m[(1, 1)] = C64::new(-0.2, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        let r = DensityMatrix::new_unphysical(m).unwrap();
        assert!(!r.is_physical());
        assert!(concurrence(&r).is_err());
        assert!(r.regularized(1e-3).is_physical());
        let j = serde_json::to_string(&DensityMatrix::werner(0.3).unwrap()).unwrap();
        let back: DensityMatrix = serde_json::from_str(&j).unwrap();
        assert!((back.matrix() - DensityMatrix::werner(0.3).unwrap().matrix()).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn metrics_are_bounded(seed in any::<u64>()) {
            let r = random_state(&mut ChaCha8Rng::seed_from_u64(seed));
            let c = concurrence(&r).unwrap();
            let (f, _) = best_maximally_entangled_fidelity(&r);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
            prop_assert!((r.purity() - r.matrix().norm_squared()).abs() < 1e-12);
        }
    }
}
