//! Half-space operators realized as restriction ∘ whole-space operator ∘ extension.

use super::{extend_as, restrict, BoundaryFlavor, HalfField};
use crate::calculus::{coleray_symbol, exterior_symbol, interior_symbol, leray_symbol, Multiplier, SectorPoint};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::tolerances::HALF_SPACE_DECOMP;

fn hodge_flavor(u: &HalfField) -> Result<BoundaryFlavor> {
    match u.flavor() {
        Some(f @ (BoundaryFlavor::Ht | BoundaryFlavor::Hn)) => Ok(f),
        Some(f) => Err(Error::Flavor(format!("d and δ need an Ht or Hn field, got {f}"))),
        None => Err(Error::Flavor("field has no boundary flavor".into())),
    }
}

/// `restrict(op(extend u))` with the given flavor on both sides.
pub fn through_extension<F>(u: &HalfField, flavor: BoundaryFlavor, op: F) -> Result<HalfField>
where
    F: FnOnce(&SpectralField) -> Result<SpectralField>,
{
    let spec = extend_as(u, flavor)?.fft()?;
    restrict(&op(&spec)?.ifft(), Some(flavor))
}

/// `d` on the half-space; both Hodge flavors are preserved by `d`.
pub fn d_half(u: &HalfField) -> Result<HalfField> {
    let flavor = hodge_flavor(u)?;
    through_extension(u, flavor, |s| Ok(exterior_symbol(s)))
}

/// `δ` on the half-space.
pub fn delta_half(u: &HalfField) -> Result<HalfField> {
    let flavor = hodge_flavor(u)?;
    through_extension(u, flavor, |s| Ok(interior_symbol(s)))
}

/// `(λ − Δ_H)^{−1} f` via `E(λ − Δ_H)^{−1} = (λ − Δ)^{−1} E`.
///
/// Scalar flavors `D` and `N` give the Dirichlet and Neumann resolvents.
pub fn hodge_resolvent(lambda: &SectorPoint, f: &HalfField, flavor: BoundaryFlavor) -> Result<HalfField> {
    through_extension(f, flavor, |s| Multiplier::Resolvent(lambda.lambda()).apply(s))
}

/// `e^{tΔ_H} u`.
pub fn hodge_heat(t: f64, u: &HalfField, flavor: BoundaryFlavor) -> Result<HalfField> {
    through_extension(u, flavor, |s| Multiplier::Heat(t).apply(s))
}

fn split<F>(u: &HalfField, flavor: BoundaryFlavor, symbol: F) -> Result<(HalfField, HalfField)>
where
    F: FnOnce(&SpectralField) -> Result<(SpectralField, SpectralField)>,
{
    if u.flavor() != Some(flavor) {
        return Err(Error::Flavor(format!(
            "projector needs a {flavor} field, got {:?}",
            u.flavor()
        )));
    }
    let spec = extend_as(u, flavor)?.fft()?;
    let (_, second) = symbol(&spec)?;
    let second = restrict(&second.ifft(), Some(flavor))?;
    let first = u.sub(&second)?;
    Ok((first, second))
}

/// Half-space Hodge decomposition `u = Pu + Gu` for `Ht` fields.
pub fn leray_halfspace(u: &HalfField) -> Result<(HalfField, HalfField)> {
    split(u, BoundaryFlavor::Ht, leray_symbol)
}

/// Mirrored decomposition `u = Qu + (I − Q)u` for `Hn` fields.
pub fn q_projector(u: &HalfField) -> Result<(HalfField, HalfField)> {
    split(u, BoundaryFlavor::Hn, coleray_symbol)
}

/// Hodge–Stokes operator `A u = δ d u` on `Ht` fields with `Pu = u`.
pub fn hodge_stokes_apply(u: &HalfField) -> Result<HalfField> {
    let (_, g) = leray_halfspace(u)?;
    let scale = u.norm_l2();
    let defect = g.norm_l2();
    if defect > HALF_SPACE_DECOMP * scale {
        return Err(Error::Domain(format!(
            "field is not solenoidal: ‖u − Pu‖ = {defect:.3e} against ‖u‖ = {scale:.3e}"
        )));
    }
    through_extension(u, BoundaryFlavor::Ht, |s| Ok(interior_symbol(&exterior_symbol(s))))
}
