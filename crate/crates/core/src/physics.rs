//! Press-fit physics: the closed-form structural equations of the
//! manufacturing process (elasticity, stiffness, forces, displacements,
//! leakage, quality monitoring).
//!
//! All operations are pure, reentrant and real-valued. Every operation
//! rejects non-finite input; domain preconditions (positivity, bounds) are
//! checked and reported through [`PhysicsError`].

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("{0} must be positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("{0} must be non-negative, got {1}")]
    Negative(&'static str, f64),
    #[error("beta_asym must lie in [0, 1], got {0}")]
    BetaOutOfRange(f64),
    #[error("tolerance bounds inverted: ltl {0} > utl {1}")]
    BoundsInverted(f64, f64),
    #[error("empty flag list")]
    EmptyFlags,
}

type Result<T> = std::result::Result<T, PhysicsError>;

#[inline]
fn finite(x: f64, name: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(PhysicsError::NonFinite(name))
    }
}

#[inline]
fn positive(x: f64, name: &'static str) -> Result<f64> {
    finite(x, name)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(PhysicsError::NonPositive(name, x))
    }
}

#[inline]
fn non_negative(x: f64, name: &'static str) -> Result<f64> {
    finite(x, name)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(PhysicsError::Negative(name, x))
    }
}

#[inline]
fn unit_interval(beta: f64) -> Result<f64> {
    if beta.is_finite() && (0.0..=1.0).contains(&beta) {
        Ok(beta)
    } else {
        Err(PhysicsError::BetaOutOfRange(beta))
    }
}

#[inline]
fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Effective elasticity modulus of the bore/valve pair:
/// `(1/e_bore + 1/e_mv)^-1`. Strictly below either input.
pub fn effective_elasticity(e_bore: f64, e_mv: f64) -> Result<f64> {
    positive(e_bore, "e_bore")?;
    positive(e_mv, "e_mv")?;
    Ok(1.0 / (1.0 / e_bore + 1.0 / e_mv))
}

/// Diameter differences between valve and bore:
/// `dd_max = d_mv_max - d_bore_min`, `dd_min = d_mv_min - d_bore_max`.
pub fn delta_d(d_mv_max: f64, d_bore_min: f64, d_mv_min: f64, d_bore_max: f64) -> Result<(f64, f64)> {
    positive(d_mv_max, "d_mv_max")?;
    positive(d_bore_min, "d_bore_min")?;
    positive(d_mv_min, "d_mv_min")?;
    positive(d_bore_max, "d_bore_max")?;
    Ok((d_mv_max - d_bore_min, d_mv_min - d_bore_max))
}

/// Asymmetry-weighted mean diameter difference:
/// `beta * dd_max + (1 - beta) * dd_min`.
pub fn delta_d_mean(dd_max: f64, dd_min: f64, beta_asym: f64) -> Result<f64> {
    finite(dd_max, "dd_max")?;
    finite(dd_min, "dd_min")?;
    unit_interval(beta_asym)?;
    Ok(beta_asym * dd_max + (1.0 - beta_asym) * dd_min)
}

/// Machine leak tolerance as a function of force overshoot:
/// `leak_tol_0 + leak_tol_ref * d_force_relu / d_force_ref`.
pub fn leak_tol_machine(
    leak_tol_0: f64,
    leak_tol_ref: f64,
    d_force_relu: f64,
    d_force_ref: f64,
) -> Result<f64> {
    finite(leak_tol_0, "leak_tol_0")?;
    positive(leak_tol_ref, "leak_tol_ref")?;
    non_negative(d_force_relu, "d_force_relu")?;
    positive(d_force_ref, "d_force_ref")?;
    Ok(leak_tol_0 + leak_tol_ref * d_force_relu / d_force_ref)
}

/// Press-fit leakage area:
/// `beta * relu(dd_max - leak_tol) + (1 - beta) * relu(dd_min - leak_tol)`.
pub fn leak_area_pf(dd_max: f64, dd_min: f64, leak_tol: f64, beta_asym: f64) -> Result<f64> {
    finite(dd_max, "dd_max")?;
    finite(dd_min, "dd_min")?;
    finite(leak_tol, "leak_tol")?;
    unit_interval(beta_asym)?;
    Ok(beta_asym * relu(dd_max - leak_tol) + (1.0 - beta_asym) * relu(dd_min - leak_tol))
}

/// Intrinsic valve leakage: negative pre-production areas are cut to zero.
pub fn a_leak_mv(a_raw: f64) -> Result<f64> {
    finite(a_raw, "a_raw")?;
    Ok(relu(a_raw))
}

/// Leakage area of one bore: valve path plus press-fit path.
pub fn a_leak_bore(a_leak_mv: f64, a_leak_pf: f64) -> Result<f64> {
    non_negative(a_leak_mv, "a_leak_mv")?;
    non_negative(a_leak_pf, "a_leak_pf")?;
    Ok(a_leak_mv + a_leak_pf)
}

/// Total leakage area of a chamber: sum over its bores.
pub fn a_leak_total(areas: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &a in areas {
        non_negative(a, "area")?;
        sum += a;
    }
    Ok(sum)
}

/// Press-fit stiffness, linear in the mean diameter difference and the
/// effective elasticity relative to machine reference values:
/// `k_ref * (dd_mean / dd_ref) * (e_eff / e_ref)`.
pub fn pf_stiffness(k_ref: f64, dd_mean: f64, dd_ref: f64, e_eff: f64, e_ref: f64) -> Result<f64> {
    positive(k_ref, "k_ref")?;
    finite(dd_mean, "dd_mean")?;
    positive(dd_ref, "dd_ref")?;
    finite(e_eff, "e_eff")?;
    positive(e_ref, "e_ref")?;
    Ok(k_ref * (dd_mean / dd_ref) * (e_eff / e_ref))
}

/// Total system stiffness: harmonic combination of machine and press-fit
/// stiffness, `(1/k_machine + 1/k_pf)^-1`.
pub fn total_stiffness(k_machine: f64, k_pf: f64) -> Result<f64> {
    positive(k_machine, "k_machine")?;
    positive(k_pf, "k_pf")?;
    Ok(1.0 / (1.0 / k_machine + 1.0 / k_pf))
}

/// Pressing force over the engagement length: `l_mv_pf * k_stiff_pf`.
pub fn pressing_force(l_mv_pf: f64, k_stiff_pf: f64) -> Result<f64> {
    positive(l_mv_pf, "l_mv_pf")?;
    positive(k_stiff_pf, "k_stiff_pf")?;
    Ok(l_mv_pf * k_stiff_pf)
}

/// Tool displacement: `ds_grad = force / k_stiff`, `s_grad = s0 + ds_grad`.
pub fn displacement(force: f64, k_stiff: f64, s0: f64) -> Result<(f64, f64)> {
    finite(force, "force")?;
    positive(k_stiff, "k_stiff")?;
    finite(s0, "s0")?;
    let ds_grad = force / k_stiff;
    Ok((ds_grad, s0 + ds_grad))
}

/// Trigger-stop overshoot: `f_max = force + df_trigger_stop`,
/// `ds_max = df_trigger_stop / k_stiff_machine`, `s_max = s_grad + ds_max`.
pub fn max_force_and_displacement(
    force: f64,
    df_trigger_stop: f64,
    k_stiff_machine: f64,
    s_grad: f64,
) -> Result<(f64, f64, f64)> {
    finite(force, "force")?;
    non_negative(df_trigger_stop, "df_trigger_stop")?;
    positive(k_stiff_machine, "k_stiff_machine")?;
    finite(s_grad, "s_grad")?;
    let ds_max = df_trigger_stop / k_stiff_machine;
    Ok((force + df_trigger_stop, ds_max, s_grad + ds_max))
}

/// Force excess over the chamber limit, cut at zero:
/// `relu(f_max_chamber - f_lim)`.
pub fn delta_force_relu(f_max_chamber: f64, f_lim: f64) -> Result<f64> {
    finite(f_max_chamber, "f_max_chamber")?;
    finite(f_lim, "f_lim")?;
    Ok(relu(f_max_chamber - f_lim))
}

/// Conformance check: true iff `ltl <= x <= utl`, bounds inclusive.
pub fn mp_good(x: f64, ltl: f64, utl: f64) -> Result<bool> {
    finite(x, "x")?;
    finite(ltl, "ltl")?;
    finite(utl, "utl")?;
    if ltl > utl {
        return Err(PhysicsError::BoundsInverted(ltl, utl));
    }
    Ok(ltl <= x && x <= utl)
}

/// Process conformance: conjunction of all MpGood flags.
pub fn process_result(flags: &[bool]) -> Result<bool> {
    if flags.is_empty() {
        return Err(PhysicsError::EmptyFlags);
    }
    Ok(flags.iter().all(|&f| f))
}

/// Magnetic valve parameters (per bore station).
#[derive(Debug, Clone, PartialEq)]
pub struct MvParams {
    /// Elasticity, MPa.
    pub e_mv: f64,
    /// Pre-ReLU intrinsic leakage area, mm^2.
    pub a_leak_mv_raw: f64,
    /// Diameters, mm.
    pub d_mv_max: f64,
    pub d_mv_min: f64,
    /// Axial engagement length, mm.
    pub l_mv_pf: f64,
}

impl MvParams {
    pub fn new(e_mv: f64, a_leak_mv_raw: f64, d_mv_max: f64, d_mv_min: f64, l_mv_pf: f64) -> Result<Self> {
        positive(e_mv, "e_mv")?;
        finite(a_leak_mv_raw, "a_leak_mv_raw")?;
        positive(d_mv_min, "d_mv_min")?;
        positive(d_mv_max, "d_mv_max")?;
        if d_mv_max < d_mv_min {
            return Err(PhysicsError::BoundsInverted(d_mv_min, d_mv_max));
        }
        positive(l_mv_pf, "l_mv_pf")?;
        Ok(MvParams { e_mv, a_leak_mv_raw, d_mv_max, d_mv_min, l_mv_pf })
    }
}

/// Hydraulic-block bore parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BoreParams {
    /// Elasticity, MPa.
    pub e_bore: f64,
    /// Diameters, mm.
    pub d_bore_max: f64,
    pub d_bore_min: f64,
}

impl BoreParams {
    pub fn new(e_bore: f64, d_bore_max: f64, d_bore_min: f64) -> Result<Self> {
        positive(e_bore, "e_bore")?;
        positive(d_bore_min, "d_bore_min")?;
        positive(d_bore_max, "d_bore_max")?;
        if d_bore_max < d_bore_min {
            return Err(PhysicsError::BoundsInverted(d_bore_min, d_bore_max));
        }
        Ok(BoreParams { e_bore, d_bore_max, d_bore_min })
    }
}

/// Machine-dependent parameters of a press-fit station.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MachineParams {
    /// Machine frame stiffness, N/mm.
    pub k_stiff_machine: f64,
    /// Press-fit stiffness reference point.
    pub k_stiff_pf_ref: f64,
    pub k_stiff_pf_dd_ref: f64,
    pub k_stiff_pf_e_ref: f64,
    /// Weighting between max and min diameter difference.
    pub beta_asym: f64,
    /// Leak tolerance model, mm.
    pub leak_tol_0: f64,
    pub leak_tol_ref: f64,
    /// Force overshoot reference, N.
    pub d_force_ref: f64,
    /// Chamber force limit, N.
    pub f_lim: f64,
    /// Tool start position, mm.
    pub s0: f64,
}

impl MachineParams {
    pub fn check(&self) -> Result<()> {
        positive(self.k_stiff_machine, "k_stiff_machine")?;
        positive(self.k_stiff_pf_ref, "k_stiff_pf_ref")?;
        positive(self.k_stiff_pf_dd_ref, "k_stiff_pf_dd_ref")?;
        positive(self.k_stiff_pf_e_ref, "k_stiff_pf_e_ref")?;
        unit_interval(self.beta_asym)?;
        finite(self.leak_tol_0, "leak_tol_0")?;
        positive(self.leak_tol_ref, "leak_tol_ref")?;
        positive(self.d_force_ref, "d_force_ref")?;
        positive(self.f_lim, "f_lim")?;
        finite(self.s0, "s0")?;
        Ok(())
    }
}
