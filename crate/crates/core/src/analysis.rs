//! Error norms and observed convergence orders.

use alloc::vec::Vec;

use crate::error::{PmeError, Result};
use crate::math;
use crate::mesh::{BoxDomain, Mesh};
use crate::quadrature::cell_points;

/// A discrete density to compare against an exact one.
#[derive(Debug, Clone, Copy)]
pub enum DiscreteDensity<'a> {
    /// `exp` of a continuous piecewise linear (bilinear on quads) `u`;
    /// a cell touching an inactive vertex counts as zero density.
    LogNodal { u: &'a [f64], active: &'a [bool] },
    /// One value per cell.
    CellConstant(&'a [f64]),
}

impl DiscreteDensity<'_> {
    fn at(&self, mesh: &Mesh, k: usize, shape: &[f64; 4]) -> f64 {
        match *self {
            DiscreteDensity::LogNodal { u, active } => {
                let cell = mesh.cell(k);
                if cell.iter().any(|&v| !active[v]) {
                    return 0.0;
                }
                math::exp(cell.iter().enumerate().map(|(i, &v)| shape[i] * u[v]).sum())
            }
            DiscreteDensity::CellConstant(values) => values[k],
        }
    }
}

/// `L²` distance between `density` and `exact` over the cells whose
/// barycenter lies in the closed `region`, with a quadrature exact to
/// `degree`.
pub fn l2_error(
    mesh: &Mesh,
    density: DiscreteDensity<'_>,
    exact: impl Fn([f64; 2]) -> f64,
    region: &BoxDomain,
    degree: usize,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut any = false;
    for k in 0..mesh.num_cells() {
        if !region.contains(mesh.barycenter(k), mesh.dim()) {
            continue;
        }
        any = true;
        for q in cell_points(mesh, k, degree)? {
            let e = density.at(mesh, k, &q.shape) - exact(q.x);
            sum += q.weight * e * e;
        }
    }
    if any {
        Ok(math::sqrt(sum))
    } else {
        Err(PmeError::EmptyRegion)
    }
}

/// Observed orders `log(e_{l-1}/e_l)/log(ratio)`; the first level has none.
pub fn convergence_order(errors: &[f64], ratio: f64) -> Result<Vec<Option<f64>>> {
    if errors.len() < 2 {
        return Err(PmeError::TooFewLevels);
    }
    for (level, &e) in errors.iter().enumerate() {
        if e == 0.0 {
            return Err(PmeError::ExactAtLevel { level });
        }
        if !(e > 0.0) {
            return Err(PmeError::InvalidError { level });
        }
    }
    let mut out = Vec::with_capacity(errors.len());
    out.push(None);
    for w in errors.windows(2) {
        out.push(Some(math::ln(w[0] / w[1]) / math::ln(ratio)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, MeshKind};
    use alloc::vec;

    #[test]
    fn l2_examples() {
        let m = build_structured_mesh(MeshKind::Interval, BoxDomain::interval(0.0, 1.0), &[1]).unwrap();
        let e = l2_error(&m, DiscreteDensity::CellConstant(&[0.5]), |x| x[0], &BoxDomain::interval(0.0, 1.0), 4).unwrap();
        assert!((e - 1.0 / 12f64.sqrt()).abs() < 1e-15);

        let sq = build_structured_mesh(MeshKind::Quad, BoxDomain::square(0.0, 1.0), &[3, 3]).unwrap();
        let ones = vec![1.0; 9];
        let e = l2_error(&sq, DiscreteDensity::CellConstant(&ones), |_| 0.0, &BoxDomain::square(0.0, 1.0), 4).unwrap();
        assert!((e - 1.0).abs() < 1e-14);

        let u = vec![0.0; 16];
        let act = vec![true; 16];
        let d = DiscreteDensity::LogNodal { u: &u, active: &act };
        assert_eq!(l2_error(&sq, d, |_| 1.0, &BoxDomain::square(0.0, 1.0), 4).unwrap(), 0.0);
        assert_eq!(
            l2_error(&sq, d, |_| 1.0, &BoxDomain::square(5.0, 6.0), 4),
            Err(PmeError::EmptyRegion)
        );
    }

    #[test]
    fn inactive_cells_count_as_zero() {
        let m = build_structured_mesh(MeshKind::Interval, BoxDomain::interval(0.0, 2.0), &[2]).unwrap();
        let u = [0.0, 0.0, 0.0];
        let act = [true, true, false];
        let e = l2_error(&m, DiscreteDensity::LogNodal { u: &u, active: &act }, |_| 1.0, &BoxDomain::interval(0.0, 2.0), 4)
            .unwrap();
        assert!((e - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orders() {
        let o = convergence_order(&[0.1, 0.025], 2.0).unwrap();
        assert_eq!(o[0], None);
        assert!((o[1].unwrap() - 2.0).abs() < 1e-14);
        let o = convergence_order(&[0.0453, 0.0227], 2.0).unwrap();
        assert!((o[1].unwrap() - 0.997).abs() < 1e-3);
        assert_eq!(convergence_order(&[0.1], 2.0), Err(PmeError::TooFewLevels));
        assert_eq!(convergence_order(&[0.1, 0.0], 2.0), Err(PmeError::ExactAtLevel { level: 1 }));
    }
}
