use crate::error::{Error, Result};

/// Share of the spectrum kept for energy-integrated level statistics.
pub const DEFAULT_INNER_FRACTION: f64 = 0.8;

/// `(E - E_min) / (E_max - E_min)`, clamped to `[0, 1]` for energies that
/// overshoot the range by at most `1e-12` of its scale.
pub fn rescaled_energy(energy: f64, e_min: f64, e_max: f64) -> Result<f64> {
    let width = e_max - e_min;
    let scale = e_min.abs().max(e_max.abs()).max(1.0);
    if !(width > 1e-12 * scale) {
        return Err(Error::DegenerateWidth { width });
    }
    let slack = 1e-12 * scale;
    if !(energy >= e_min - slack && energy <= e_max + slack) {
        return Err(Error::InvalidParameter(alloc::format!(
            "energy {energy} outside [{e_min}, {e_max}]"
        )));
    }
    Ok(((energy - e_min) / width).clamp(0.0, 1.0))
}

/// Drops `floor((1 - fraction) / 2 * len)` levels from each end.
pub fn inner_fraction(energies: &[f64], fraction: f64) -> Result<&[f64]> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    // the tolerance absorbs representation error, e.g. (1 - 0.8) * 10 / 2 = 0.999...
    let drop = libm::floor((1.0 - fraction) * energies.len() as f64 / 2.0 + 1e-9) as usize;
    if 2 * drop >= energies.len() {
        return Err(Error::EmptySelection);
    }
    Ok(&energies[drop..energies.len() - drop])
}
