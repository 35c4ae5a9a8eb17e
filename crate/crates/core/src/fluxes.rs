//! Two-point entropy-conservative flux and the interface fluctuations built
//! on it (linear path, trapezoidal path integral).
//!
//! ```text
//! D⁻ = f*(uL,uR) − f(uL) + ½ B(uL) ⟦u⟧
//! D⁺ = f(uR) − f*(uL,uR) + ½ B(uR) ⟦u⟧
//! ```
//!
//! The entropy-stable variant subtracts ½ λmax Q ⟦w⟧ from f*, with Q the
//! block-diagonal inverse entropy Hessian; the naive variant uses ⟦u⟧
//! instead and is not well-balanced.

use crate::error::{Error, Result};
use crate::model::{moment, to_primitive_into, Model, H, HU};

/// Left- and right-going interface contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct Fluctuation {
    pub dminus: Vec<f64>,
    pub dplus: Vec<f64>,
}

/// Interface dissipation added to the EC fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxMode {
    /// No dissipation: entropy conservative.
    Ec,
    /// Rusanov-type dissipation in entropy variables: entropy stable and
    /// well-balanced.
    Es,
    /// Rusanov dissipation on conserved variables (comparison mode).
    Rusanov,
}

impl std::str::FromStr for FluxMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ec" => Ok(FluxMode::Ec),
            "es" => Ok(FluxMode::Es),
            "rusanov" | "rusanov-naive" => Ok(FluxMode::Rusanov),
            other => Err(Error::Config(format!("unknown flux mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for FluxMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FluxMode::Ec => "ec",
            FluxMode::Es => "es",
            FluxMode::Rusanov => "rusanov",
        })
    }
}

/// Conserved values, primitives and physical flux at one point.
#[derive(Debug, Clone, Copy)]
pub struct PointData<'a> {
    pub u: &'a [f64],
    pub prim: &'a [f64],
    pub flux: &'a [f64],
}

#[inline]
fn avg(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// EC flux from conserved/primitive pairs.
#[inline]
pub fn ec_flux_into(model: &Model, ul: &[f64], pl: &[f64], ur: &[f64], pr: &[f64], out: &mut [f64]) {
    let n = model.n_moments();
    let inv_r = model.inv_r();
    let hu = avg(ul[HU], ur[HU]);
    let um = avg(pl[HU], pr[HU]);
    out[H] = hu;
    let mut mom = hu * um;
    for j in 0..n {
        let c = moment(j);
        mom += avg(ul[c], ur[c]) * avg(pl[c], pr[c]) * inv_r[j];
    }
    out[HU] = mom;
    for i in 0..n {
        let c = moment(i);
        out[c] = hu * avg(pl[c], pr[c]) + avg(ul[c], ur[c]) * um;
    }
    if !model.is_linearized() {
        let a = model.tensors().a_flat();
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                let hal = avg(ul[moment(j)], ur[moment(j)]);
                let row = &a[(i * n + j) * n..(i * n + j + 1) * n];
                let mut t = 0.0;
                for k in 0..n {
                    t += row[k] * avg(pl[moment(k)], pr[moment(k)]);
                }
                s += hal * t;
            }
            out[moment(i)] += s;
        }
    }
    out[n + 2] = 0.0;
}

/// Jump in total height h + b, formed so that equal levels cancel exactly.
#[inline]
pub fn total_height_jump(ul: &[f64], ur: &[f64]) -> f64 {
    let b = ul.len() - 1;
    (ur[H] + ur[b]) - (ul[H] + ul[b])
}

/// Scratch space for one interface evaluation.
#[derive(Debug, Clone)]
pub struct FluxScratch {
    fstar: Vec<f64>,
    jump: Vec<f64>,
    bl: Vec<f64>,
    br: Vec<f64>,
    wl: Vec<f64>,
    wr: Vec<f64>,
    diss: Vec<f64>,
}

impl FluxScratch {
    pub fn new(nv: usize) -> Self {
        FluxScratch {
            fstar: vec![0.0; nv],
            jump: vec![0.0; nv],
            bl: vec![0.0; nv],
            br: vec![0.0; nv],
            wl: vec![0.0; nv],
            wr: vec![0.0; nv],
            diss: vec![0.0; nv],
        }
    }
}

/// Q_ES ⟦w⟧ with Q = block-diag(H̄, 0), H̄ = ({y}{y}ᵀ + diag({z}))/g,
/// y = (1, u_m, α), z = (0, gh, 3gh, …, (2N+1)gh). Written into `out`.
#[inline]
fn entropy_dissipation_into(model: &Model, pl: &[f64], pr: &[f64], dw: &[f64], out: &mut [f64]) {
    let n = model.n_moments();
    let g = model.g();
    let h = avg(pl[H], pr[H]);
    // {y}·⟦w⟧ over the first N+2 components
    let mut ydw = dw[H];
    ydw += avg(pl[HU], pr[HU]) * dw[HU];
    for i in 0..n {
        ydw += avg(pl[moment(i)], pr[moment(i)]) * dw[moment(i)];
    }
    let inv_g = 1.0 / g;
    out[H] = ydw * inv_g;
    out[HU] = (avg(pl[HU], pr[HU]) * ydw + g * h * dw[HU]) * inv_g;
    for i in 0..n {
        let c = moment(i);
        let r = 2.0 * (i + 1) as f64 + 1.0;
        out[c] = (avg(pl[c], pr[c]) * ydw + r * g * h * dw[c]) * inv_g;
    }
    out[n + 2] = 0.0;
}

/// Interface fluctuations for the given mode, written into `dminus`/`dplus`.
pub fn fluctuations_into(
    model: &Model,
    mode: FluxMode,
    left: PointData<'_>,
    right: PointData<'_>,
    scratch: &mut FluxScratch,
    dminus: &mut [f64],
    dplus: &mut [f64],
) {
    let nv = model.n_vars();
    let FluxScratch { fstar, jump, bl, br, wl, wr, diss } = scratch;
    ec_flux_into(model, left.u, left.prim, right.u, right.prim, fstar);
    for c in 0..nv {
        jump[c] = right.u[c] - left.u[c];
    }
    let d_eta = total_height_jump(left.u, right.u);
    model.nonconservative_into(left.prim, jump, d_eta, bl);
    model.nonconservative_into(right.prim, jump, d_eta, br);

    match mode {
        FluxMode::Ec => {}
        FluxMode::Es => {
            model.entropy_vars_into(left.u, left.prim, wl);
            model.entropy_vars_into(right.u, right.prim, wr);
            for c in 0..nv {
                wr[c] -= wl[c];
            }
            entropy_dissipation_into(model, left.prim, right.prim, wr, diss);
            let lam = model
                .max_abs_eigenvalue_prim(left.prim)
                .max(model.max_abs_eigenvalue_prim(right.prim));
            for c in 0..nv {
                fstar[c] -= 0.5 * lam * diss[c];
            }
        }
        FluxMode::Rusanov => {
            let lam = model
                .max_abs_eigenvalue_prim(left.prim)
                .max(model.max_abs_eigenvalue_prim(right.prim));
            for c in 0..nv - 1 {
                fstar[c] -= 0.5 * lam * jump[c];
            }
        }
    }

    for c in 0..nv {
        dminus[c] = fstar[c] - left.flux[c] + 0.5 * bl[c];
        dplus[c] = right.flux[c] - fstar[c] + 0.5 * br[c];
    }
}

fn checked_pair(model: &Model, ul: &[f64], ur: &[f64]) -> Result<[Vec<f64>; 4]> {
    if ul.len() != ur.len() {
        return Err(Error::arg("left and right states have different moment counts"));
    }
    model.check_state(ul)?;
    model.check_state(ur)?;
    let nv = ul.len();
    let mut pl = vec![0.0; nv];
    let mut pr = vec![0.0; nv];
    to_primitive_into(ul, &mut pl);
    to_primitive_into(ur, &mut pr);
    let mut fl = vec![0.0; nv];
    let mut fr = vec![0.0; nv];
    model.flux_into(ul, &pl, &mut fl);
    model.flux_into(ur, &pr, &mut fr);
    Ok([pl, pr, fl, fr])
}

/// Entropy-conservative two-point flux.
pub fn ec_flux(model: &Model, ul: &[f64], ur: &[f64]) -> Result<Vec<f64>> {
    let [pl, pr, _, _] = checked_pair(model, ul, ur)?;
    let mut out = vec![0.0; ul.len()];
    ec_flux_into(model, ul, &pl, ur, &pr, &mut out);
    Ok(out)
}

fn fluctuations(model: &Model, mode: FluxMode, ul: &[f64], ur: &[f64]) -> Result<Fluctuation> {
    let [pl, pr, fl, fr] = checked_pair(model, ul, ur)?;
    let nv = ul.len();
    let mut s = FluxScratch::new(nv);
    let mut dminus = vec![0.0; nv];
    let mut dplus = vec![0.0; nv];
    fluctuations_into(
        model,
        mode,
        PointData { u: ul, prim: &pl, flux: &fl },
        PointData { u: ur, prim: &pr, flux: &fr },
        &mut s,
        &mut dminus,
        &mut dplus,
    );
    Ok(Fluctuation { dminus, dplus })
}

pub fn ec_fluctuations(model: &Model, ul: &[f64], ur: &[f64]) -> Result<Fluctuation> {
    fluctuations(model, FluxMode::Ec, ul, ur)
}

pub fn es_fluctuations(model: &Model, ul: &[f64], ur: &[f64]) -> Result<Fluctuation> {
    fluctuations(model, FluxMode::Es, ul, ur)
}

pub fn rusanov_fluctuations(model: &Model, ul: &[f64], ur: &[f64]) -> Result<Fluctuation> {
    fluctuations(model, FluxMode::Rusanov, ul, ur)
}

/// The (N+3)×(N+3) matrix block-diag(H̄, 0), row-major.
pub fn es_dissipation_matrix(model: &Model, ul: &[f64], ur: &[f64]) -> Result<Vec<Vec<f64>>> {
    let [pl, pr, _, _] = checked_pair(model, ul, ur)?;
    let n = model.n_moments();
    let nv = n + 3;
    let g = model.g();
    let h = avg(pl[H], pr[H]);
    let mut y = vec![1.0; n + 2];
    y[1] = avg(pl[HU], pr[HU]);
    for i in 0..n {
        y[2 + i] = avg(pl[moment(i)], pr[moment(i)]);
    }
    let mut z = vec![0.0; n + 2];
    z[1] = g * h;
    for i in 0..n {
        z[2 + i] = (2.0 * (i + 1) as f64 + 1.0) * g * h;
    }
    let mut q = vec![vec![0.0; nv]; nv];
    for r in 0..n + 2 {
        for c in 0..n + 2 {
            q[r][c] = (y[r] * y[c] + if r == c { z[r] } else { 0.0 }) / g;
        }
    }
    Ok(q)
}

/// Residual of the entropy-conservation condition for the two-point flux,
/// ⟦w⟧ᵀf* − {wᵀB}⟦u⟧ − ⟦wᵀf − F⟧, together with |⟦wᵀf − F⟧|.
pub fn ec_condition_residual(model: &Model, ul: &[f64], ur: &[f64]) -> Result<(f64, f64)> {
    let [pl, pr, _, _] = checked_pair(model, ul, ur)?;
    let nv = ul.len();
    let mut fstar = vec![0.0; nv];
    ec_flux_into(model, ul, &pl, ur, &pr, &mut fstar);
    let mut wl = vec![0.0; nv];
    let mut wr = vec![0.0; nv];
    model.entropy_vars_into(ul, &pl, &mut wl);
    model.entropy_vars_into(ur, &pr, &mut wr);
    let jump: Vec<f64> = (0..nv).map(|c| ur[c] - ul[c]).collect();
    let d_eta = total_height_jump(ul, ur);
    let mut bl = vec![0.0; nv];
    let mut br = vec![0.0; nv];
    model.nonconservative_into(&pl, &jump, d_eta, &mut bl);
    model.nonconservative_into(&pr, &jump, d_eta, &mut br);
    let mut lhs = 0.0;
    for c in 0..nv {
        lhs += (wr[c] - wl[c]) * fstar[c] - 0.5 * (wl[c] * bl[c] + wr[c] * br[c]);
    }
    let jpsi = model.entropy_potential(ur)? - model.entropy_potential(ul)?;
    Ok((lhs - jpsi, jpsi.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConservedState, ModelKind, PhysicsParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(n: usize, g: f64, kind: ModelKind) -> Model {
        Model::new(n, PhysicsParams::new(g, kind)).unwrap()
    }

    fn state(h: f64, um: f64, alpha: &[f64], b: f64) -> Vec<f64> {
        ConservedState::from_primitive(h, um, alpha, b).0
    }

    fn random_state(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        state(rng.gen_range(0.1..5.0), rng.gen_range(-3.0..3.0), &alpha, rng.gen_range(-1.0..1.0))
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn consistency_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [ModelKind::Swme, ModelKind::Swlme] {
            let m = model(3, 9.81, kind);
            for _ in 0..100 {
                let u = random_state(&mut rng, 3);
                let f = m.physical_flux(&u).unwrap();
                let fe = ec_flux(&m, &u, &u).unwrap();
                for (a, b) in f.iter().zip(&fe) {
                    assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs()));
                }
                let v = random_state(&mut rng, 3);
                assert_eq!(ec_flux(&m, &u, &v).unwrap(), ec_flux(&m, &v, &u).unwrap());
            }
        }
    }

    #[test]
    fn mismatched_moment_counts_error() {
        let m = model(2, 1.0, ModelKind::Swme);
        assert!(ec_flux(&m, &state(1.0, 0.0, &[0.0, 0.0], 0.0), &state(1.0, 0.0, &[0.0], 0.0)).is_err());
    }

    #[test]
    fn equal_states_give_zero_fluctuations() {
        let m = model(2, 9.81, ModelKind::Swme);
        let u = state(1.2, 0.4, &[0.1, -0.3], 0.2);
        for fl in [ec_fluctuations(&m, &u, &u).unwrap(), es_fluctuations(&m, &u, &u).unwrap()] {
            assert!(fl.dminus.iter().chain(&fl.dplus).all(|v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn lake_at_rest_pairs_give_zero_fluctuations() {
        let m = model(2, 9.812, ModelKind::Swme);
        let h0 = 1.75;
        for (bl, br) in [(0.1, 0.9), (0.0, 0.6065306597126334), (0.3, 0.3)] {
            let ul = state(h0 - bl, 0.0, &[0.0, 0.0], bl);
            let ur = state(h0 - br, 0.0, &[0.0, 0.0], br);
            for fl in [ec_fluctuations(&m, &ul, &ur).unwrap(), es_fluctuations(&m, &ul, &ur).unwrap()] {
                assert!(fl.dminus.iter().chain(&fl.dplus).all(|v| v.abs() < 1e-14), "{fl:?}");
            }
            let rus = rusanov_fluctuations(&m, &ul, &ur).unwrap();
            if bl != br {
                assert!(rus.dminus[0].abs() > 1e-3, "naive dissipation should see ⟦h⟧");
            }
        }
    }

    #[test]
    fn path_conservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = model(3, 9.81, ModelKind::Swme);
        for _ in 0..500 {
            let ul = random_state(&mut rng, 3);
            let ur = random_state(&mut rng, 3);
            let jump: Vec<f64> = ul.iter().zip(&ur).map(|(a, b)| b - a).collect();
            let bl = m.nonconservative_product(&ul, &jump).unwrap();
            let br = m.nonconservative_product(&ur, &jump).unwrap();
            let fl = m.physical_flux(&ul).unwrap();
            let fr = m.physical_flux(&ur).unwrap();
            for mode in [FluxMode::Ec, FluxMode::Es, FluxMode::Rusanov] {
                let d = fluctuations(&m, mode, &ul, &ur).unwrap();
                for c in 0..ul.len() {
                    let expect = fr[c] - fl[c] + 0.5 * (bl[c] + br[c]);
                    let got = d.dminus[c] + d.dplus[c];
                    assert!((got - expect).abs() <= 1e-12 * (1.0 + expect.abs()), "{mode:?} c={c}");
                }
            }
        }
    }

    #[test]
    fn ec_condition_holds_for_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in [ModelKind::Swme, ModelKind::Swlme] {
            for n in 1..=4 {
                let m = model(n, 9.81, kind);
                for _ in 0..300 {
                    let ul = random_state(&mut rng, n);
                    let ur = random_state(&mut rng, n);
                    let (res, scale) = ec_condition_residual(&m, &ul, &ur).unwrap();
                    assert!(res.abs() <= 1e-12 * (scale + 1.0), "{kind:?} N={n}: {res}");
                }
            }
        }
    }

    #[test]
    fn ec_fluctuations_reproduce_entropy_flux_jump() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in [ModelKind::Swme, ModelKind::Swlme] {
            let m = model(2, 9.81, kind);
            for _ in 0..500 {
                let ul = random_state(&mut rng, 2);
                let ur = random_state(&mut rng, 2);
                let d = ec_fluctuations(&m, &ul, &ur).unwrap();
                let wl = m.entropy_vars(&ul).unwrap().0;
                let wr = m.entropy_vars(&ur).unwrap().0;
                let lhs = dot(&wl, &d.dminus) + dot(&wr, &d.dplus);
                let jf = m.entropy_flux(&ur).unwrap() - m.entropy_flux(&ul).unwrap();
                assert!((lhs - jf).abs() <= 1e-12 * (1.0 + jf.abs() + lhs.abs()), "{lhs} vs {jf}");
            }
        }
    }

    #[test]
    fn dissipation_matrix_values() {
        let m = model(2, 1.0, ModelKind::Swme);
        let u = state(1.0, 0.0, &[0.0, 0.0], 0.0);
        let q = es_dissipation_matrix(&m, &u, &u).unwrap();
        assert_eq!(q[0][0], 1.0);
        assert_eq!(q[1][1], 1.0);
        assert_eq!(q[2][2], 3.0);
        assert_eq!(q[3][3], 5.0);
        assert!(q[4].iter().all(|v| *v == 0.0));
        assert!(q.iter().all(|row| row[4] == 0.0));
    }

    #[test]
    fn dissipation_matrix_is_symmetric_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = model(3, 9.81, ModelKind::Swme);
        for _ in 0..300 {
            let ul = random_state(&mut rng, 3);
            let ur = random_state(&mut rng, 3);
            let q = es_dissipation_matrix(&m, &ul, &ur).unwrap();
            let k = 5;
            let mut a: Vec<Vec<f64>> = (0..k).map(|r| q[r][..k].to_vec()).collect();
            for r in 0..k {
                for c in 0..k {
                    assert_eq!(q[r][c], q[c][r]);
                }
            }
            // Cholesky
            for p in 0..k {
                assert!(a[p][p] > 0.0);
                let piv = a[p][p];
                for r in p + 1..k {
                    let f = a[r][p] / piv;
                    for c in p..k {
                        a[r][c] -= f * a[p][c];
                    }
                }
            }
        }
    }

    #[test]
    fn dissipation_matrix_inverts_entropy_map_for_small_jumps() {
        // diag(H̄, 1)⟦w⟧ ≈ ⟦u⟧ as the jump shrinks (flat bottom).
        let m = model(2, 9.81, ModelKind::Swme);
        let base = state(1.4, 0.3, &[0.2, -0.1], 0.0);
        let dir = [0.7, -0.4, 0.3, 0.5, 0.0];
        for eps in [1e-4, 1e-6] {
            let ur: Vec<f64> = base.iter().zip(&dir).map(|(u, d)| u + eps * d).collect();
            let q = es_dissipation_matrix(&m, &base, &ur).unwrap();
            let wl = m.entropy_vars(&base).unwrap().0;
            let wr = m.entropy_vars(&ur).unwrap().0;
            let dw: Vec<f64> = wl.iter().zip(&wr).map(|(a, b)| b - a).collect();
            for r in 0..4 {
                let got: f64 = (0..5).map(|c| q[r][c] * dw[c]).sum();
                let want = ur[r] - base[r];
                assert!((got - want).abs() <= 10.0 * eps * eps + 1e-12, "eps={eps} r={r}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn es_dissipation_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = model(2, 9.81, ModelKind::Swme);
        for _ in 0..1000 {
            let ul = random_state(&mut rng, 2);
            let ur = random_state(&mut rng, 2);
            let ec = ec_fluctuations(&m, &ul, &ur).unwrap();
            let es = es_fluctuations(&m, &ul, &ur).unwrap();
            let wl = m.entropy_vars(&ul).unwrap().0;
            let wr = m.entropy_vars(&ur).unwrap().0;
            let dw: Vec<f64> = wl.iter().zip(&wr).map(|(a, b)| b - a).collect();
            // ½λ ⟦w⟧ᵀ Q ⟦w⟧ = ⟦w⟧ᵀ (D⁺_ES − D⁺_EC)
            let extra: Vec<f64> = es.dplus.iter().zip(&ec.dplus).map(|(a, b)| a - b).collect();
            assert!(dot(&dw, &extra) >= -1e-12);
        }
    }

    #[test]
    fn flux_mode_parsing() {
        assert_eq!("ES".parse::<FluxMode>().unwrap(), FluxMode::Es);
        assert_eq!("rusanov".parse::<FluxMode>().unwrap(), FluxMode::Rusanov);
        assert!("upwind".parse::<FluxMode>().is_err());
    }
}
