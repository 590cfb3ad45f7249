use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ConvexSet;
use crate::{check_dim, Error, Result, Vector};

/// Optional cone filter for [`sphere_sample`].
#[derive(Debug, Clone, Copy)]
pub enum SphereRestriction<'a> {
    /// Keep directions inside the given H-cone.
    Cone(&'a ConvexSet),
    /// Keep directions inside the negative polar `C^⊖` of the given H-cone.
    NegativePolarOf(&'a ConvexSet),
}

impl SphereRestriction<'_> {
    fn cone(&self) -> &ConvexSet {
        match self {
            SphereRestriction::Cone(c) | SphereRestriction::NegativePolarOf(c) => c,
        }
    }

    pub fn admits(&self, u: &Vector) -> Result<bool> {
        match self {
            SphereRestriction::Cone(c) => c.contains(u, 1e-12),
            SphereRestriction::NegativePolarOf(c) => c.in_negative_polar(u),
        }
    }
}

/// Deterministic unit vectors uniform on the sphere of `ℝ^dim`, drawn as
/// normalized Gaussians from a ChaCha8 stream seeded with `seed`.
///
/// With a restriction, draws outside the cone are rejected; sampling stops
/// at `count` accepted vectors or after `1000 · (count + 1)` draws, whichever
/// comes first.
pub fn sphere_sample(
    dim: usize,
    count: usize,
    seed: u64,
    restriction: Option<SphereRestriction<'_>>,
) -> Result<Vec<Vector>> {
    if dim == 0 {
        return Err(Error::InvalidSet("sphere dimension must be positive".into()));
    }
    if let Some(r) = &restriction {
        if !r.cone().is_cone() {
            return Err(Error::NotACone);
        }
        check_dim(dim, r.cone().dim())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = 1000 * (count + 1);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count && draws < budget {
        draws += 1;
        let g = Vector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(&mut rng)));
        let norm = g.norm();
        if norm < 1e-300 {
            continue;
        }
        let u = g / norm;
        match &restriction {
            Some(r) if !r.admits(&u)? => continue,
            _ => out.push(u),
        }
    }
    if count > 0 && out.is_empty() {
        return Err(Error::EmptyRestriction);
    }
    Ok(out)
}
