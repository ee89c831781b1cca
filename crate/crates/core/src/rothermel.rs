//! Single size-class Rothermel surface spread kernel.
//!
//! Base rate `R = I_R·ξ / (ρ_b·ε·Q_ig)`, amplified as `R·(1 + Φ_w + Φ_s)`.
//! Everything here is a pure function; the engine precomputes the
//! direction-independent part once per fuel through [`FuelSpread`].
//!
//! Units: ft, lb, BTU, minutes. Angles in radians, 0 = east, counterclockwise.

use libm::{cos, exp, pow, sqrt};

use crate::fuel::{FuelCatalog, FuelError, FuelModel, Resolved};

/// Effective mineral content.
pub const MINERAL_EFFECTIVE: f64 = 0.010;
/// Total mineral content.
pub const MINERAL_TOTAL: f64 = 0.0555;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("fuel code {0} is nonburnable")]
    NonBurnable(u16),
    #[error(transparent)]
    Fuel(#[from] FuelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadInputs<'a> {
    pub fuel: &'a FuelModel,
    /// Dead fuel moisture, fraction.
    pub moisture: f64,
    /// Midflame wind speed, ft/min.
    pub wind_speed: f64,
    /// Direction the wind blows toward.
    pub wind_dir: f64,
    /// Tangent of the terrain slope along `spread_dir`; negative downslope.
    pub slope_tan: f64,
    pub spread_dir: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadComponents {
    /// Reaction intensity, BTU/ft²/min.
    pub i_r: f64,
    /// Propagating flux ratio.
    pub xi: f64,
    /// Bulk density, lb/ft³.
    pub rho_b: f64,
    /// Effective heating number.
    pub epsilon: f64,
    /// Heat of preignition, BTU/lb.
    pub q_ig: f64,
    /// Base rate of spread, ft/min.
    pub r_base: f64,
    pub phi_w: f64,
    pub phi_s: f64,
    /// Effective rate of spread, ft/min.
    pub r_eff: f64,
}

/// `I_R·ξ / (ρ_b·ε·Q_ig)`.
pub fn base_rate(i_r: f64, xi: f64, rho_b: f64, epsilon: f64, q_ig: f64) -> Result<f64, KernelError> {
    if !(rho_b > 0.0 && epsilon > 0.0 && q_ig > 0.0) {
        return Err(KernelError::Domain("nonpositive heat sink term"));
    }
    if !(i_r >= 0.0 && xi >= 0.0) {
        return Err(KernelError::Domain("negative heat source term"));
    }
    Ok(i_r * xi / (rho_b * epsilon * q_ig))
}

/// `max(0, R·(1 + Φ_w + Φ_s))`.
pub fn effective_rate(r_base: f64, phi_w: f64, phi_s: f64) -> f64 {
    let r = r_base * (1.0 + phi_w + phi_s);
    if r > 0.0 {
        r
    } else {
        0.0
    }
}

/// Moisture damping coefficient; exactly zero at or above extinction.
pub fn moisture_damping(moisture: f64, mx: f64) -> f64 {
    if moisture >= mx {
        return 0.0;
    }
    let r = moisture / mx;
    let eta = 1.0 - 2.59 * r + 5.11 * r * r - 3.52 * r * r * r;
    eta.max(0.0)
}

pub fn mineral_damping() -> f64 {
    0.174 * pow(MINERAL_EFFECTIVE, -0.19)
}

/// Optimum packing ratio for a given SAV ratio.
pub fn optimum_packing_ratio(sigma: f64) -> f64 {
    3.348 * pow(sigma, -0.8189)
}

/// Direction-independent spread quantities for one fuel at fixed moisture
/// and wind speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelSpread {
    pub i_r: f64,
    pub xi: f64,
    pub rho_b: f64,
    pub epsilon: f64,
    pub q_ig: f64,
    pub r_base: f64,
    /// Packing ratio.
    pub beta: f64,
    /// Wind factor with spread aligned to the wind.
    pub phi_w_max: f64,
    /// `5.275·β^-0.3`, multiplied by the signed squared slope.
    pub slope_coef: f64,
}

impl FuelSpread {
    pub fn new(fuel: &FuelModel, moisture: f64, wind_speed: f64) -> Result<Self, KernelError> {
        fuel.validate()?;
        if !(0.0..=1.0).contains(&moisture) {
            return Err(KernelError::Domain("moisture outside [0, 1]"));
        }
        if !(wind_speed >= 0.0 && wind_speed.is_finite()) {
            return Err(KernelError::Domain("wind speed must be finite and >= 0"));
        }
        let sigma = fuel.sigma;
        let rho_b = fuel.w0 / fuel.delta;
        let beta = rho_b / fuel.rho_p;
        let beta_ratio = beta / optimum_packing_ratio(sigma);

        let sigma_15 = pow(sigma, 1.5);
        let gamma_max = sigma_15 / (495.0 + 0.0594 * sigma_15);
        let a = 133.0 * pow(sigma, -0.7913);
        let gamma = gamma_max * pow(beta_ratio, a) * exp(a * (1.0 - beta_ratio));
        let net_load = fuel.w0 * (1.0 - MINERAL_TOTAL);
        let i_r = gamma
            * net_load
            * fuel.heat_content
            * moisture_damping(moisture, fuel.mx)
            * mineral_damping();

        let xi = exp((0.792 + 0.681 * sqrt(sigma)) * (beta + 0.1)) / (192.0 + 0.2595 * sigma);
        let epsilon = exp(-138.0 / sigma);
        let q_ig = 250.0 + 1116.0 * moisture;
        let r_base = base_rate(i_r, xi, rho_b, epsilon, q_ig)?;

        let phi_w_max = if wind_speed > 0.0 {
            let c = 7.47 * exp(-0.133 * pow(sigma, 0.55));
            let b = 0.02526 * pow(sigma, 0.54);
            let e = 0.715 * exp(-3.59e-4 * sigma);
            c * pow(wind_speed, b) * pow(beta_ratio, -e)
        } else {
            0.0
        };

        Ok(FuelSpread {
            i_r,
            xi,
            rho_b,
            epsilon,
            q_ig,
            r_base,
            beta,
            phi_w_max,
            slope_coef: 5.275 * pow(beta, -0.3),
        })
    }

    /// Wind factor projected onto `spread_dir`; zero for spread against
    /// or across the wind.
    pub fn wind_factor(&self, spread_dir: f64, wind_dir: f64) -> f64 {
        if self.phi_w_max == 0.0 {
            return 0.0;
        }
        let align = cos(spread_dir - wind_dir);
        self.phi_w_max * if align > 0.0 { align } else { 0.0 }
    }

    /// Signed slope factor; negative downslope.
    pub fn slope_factor(&self, slope_tan: f64) -> f64 {
        self.slope_coef * slope_tan * slope_tan.abs()
    }

    pub fn resolve(&self, phi_w: f64, phi_s: f64) -> SpreadComponents {
        SpreadComponents {
            i_r: self.i_r,
            xi: self.xi,
            rho_b: self.rho_b,
            epsilon: self.epsilon,
            q_ig: self.q_ig,
            r_base: self.r_base,
            phi_w,
            phi_s,
            r_eff: effective_rate(self.r_base, phi_w, phi_s),
        }
    }
}

pub fn spread_components(inputs: &SpreadInputs<'_>) -> Result<SpreadComponents, KernelError> {
    if !inputs.slope_tan.is_finite() || !inputs.spread_dir.is_finite() || !inputs.wind_dir.is_finite() {
        return Err(KernelError::Domain("non-finite geometry"));
    }
    let fs = FuelSpread::new(inputs.fuel, inputs.moisture, inputs.wind_speed)?;
    let phi_w = fs.wind_factor(inputs.spread_dir, inputs.wind_dir);
    let phi_s = fs.slope_factor(inputs.slope_tan);
    Ok(fs.resolve(phi_w, phi_s))
}

/// [`spread_components`] for a land-cover code; nonburnable codes are a
/// domain error.
#[allow(clippy::too_many_arguments)]
pub fn spread_components_for_code(
    catalog: &FuelCatalog,
    code: u16,
    moisture: f64,
    wind_speed: f64,
    wind_dir: f64,
    slope_tan: f64,
    spread_dir: f64,
) -> Result<SpreadComponents, KernelError> {
    match catalog.resolve(code)? {
        Resolved::Burnable(fuel) => spread_components(&SpreadInputs {
            fuel,
            moisture,
            wind_speed,
            wind_dir,
            slope_tan,
            spread_dir,
        }),
        Resolved::NonBurnable => Err(KernelError::NonBurnable(code)),
    }
}
