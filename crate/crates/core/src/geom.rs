//! Hyperboloid model of hyperbolic space.
//!
//! Points live on the upper sheet `{z in R^{1+d} : <z,z>_J = -1, z_0 > 0}` where
//! `<x,y>_J = -x_0 y_0 + sum_i x_i y_i`. Orientation-preserving isometries are the
//! `(d+1) x (d+1)` matrices with `A^T J A = J` that keep the upper sheet.
//!
//! Points are stored in a fixed-size coordinate array so that the random-walk hot
//! loop never allocates; the dimension is a runtime value bounded by [`MAX_DIM`].
//!
//! Far from the origin the coordinates grow like `e^r`, and `<z,z>_J` loses all
//! absolute precision to cancellation. Points are therefore re-projected onto
//! the sheet by recomputing `z_0 = sqrt(1 + |z_bar|^2)` from the spatial part, and
//! sheet defects are measured relative to `z_0^2`.

use nalgebra::DMatrix;

use crate::error::{arg_err, Error, Result};

/// Largest supported dimension `d` of `H^d`.
pub const MAX_DIM: usize = 7;

/// Tolerance beyond which an input is considered off the sheet.
pub const SHEET_TOL: f64 = 1e-8;

const COORDS: usize = MAX_DIM + 1;

/// Minkowski form `-x_0 y_0 + sum_{i>=1} x_i y_i`.
pub fn minkowski_dot(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return arg_err(format!("dimension mismatch: {} vs {}", x.len(), y.len()));
    }
    if x.len() < 3 {
        return arg_err(format!("need d >= 2 (got {} coordinates)", x.len()));
    }
    Ok(mdot(x, y))
}

#[inline]
pub(crate) fn mdot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = -x[0] * y[0];
    for i in 1..x.len() {
        acc += x[i] * y[i];
    }
    acc
}

fn check_dim(d: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&d) {
        return arg_err(format!("dimension d={d} outside supported range 2..={MAX_DIM}"));
    }
    Ok(())
}

/// A point on the upper sheet of the hyperboloid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    dim: usize,
    z: [f64; COORDS],
}

impl serde::Serialize for HPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.coords())
    }
}

impl HPoint {
    /// The base point `o = e_0`.
    pub fn origin(d: usize) -> Result<Self> {
        check_dim(d)?;
        let mut z = [0.0; COORDS];
        z[0] = 1.0;
        Ok(Self { dim: d, z })
    }

    /// Builds a point from Minkowski coordinates `(z_0, ..., z_d)`, validating the
    /// sheet equation and re-projecting away rounding noise.
    pub fn from_coords(z: &[f64]) -> Result<Self> {
        if z.is_empty() {
            return arg_err("empty coordinate vector");
        }
        let d = z.len() - 1;
        check_dim(d)?;
        if z.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        if z[0] <= 0.0 {
            return Err(Error::Domain(format!("z_0 = {} is not on the upper sheet", z[0])));
        }
        let defect = (mdot(z, z) + 1.0).abs() / z[0].powi(2).max(1.0);
        if defect > SHEET_TOL {
            return Err(Error::Domain(format!("point off the sheet (relative defect {defect:.3e})")));
        }
        Self::from_spatial(&z[1..])
    }

    /// Builds the point whose spatial coordinates are `x_bar`; `z_0` is implied.
    pub fn from_spatial(x_bar: &[f64]) -> Result<Self> {
        check_dim(x_bar.len())?;
        if x_bar.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        Ok(Self::from_spatial_unchecked(x_bar))
    }

    pub(crate) fn from_spatial_unchecked(x_bar: &[f64]) -> Self {
        let mut z = [0.0; COORDS];
        let mut n2 = 0.0;
        for (i, &c) in x_bar.iter().enumerate() {
            z[i + 1] = c;
            n2 += c * c;
        }
        z[0] = (1.0 + n2).sqrt();
        Self { dim: x_bar.len(), z }
    }

    /// The point `exp_o(r u)` for a Euclidean direction `u` in `T_o H^d ~ R^d`.
    /// The direction is normalized; a zero direction with `r > 0` is rejected.
    pub fn polar(d: usize, r: f64, direction: &[f64]) -> Result<Self> {
        check_dim(d)?;
        if direction.len() != d {
            return arg_err(format!("direction has {} entries, expected {d}", direction.len()));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return arg_err(format!("radius must be finite and >= 0 (got {r})"));
        }
        let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 {
            return Self::origin(d);
        }
        if norm == 0.0 {
            return arg_err("zero direction");
        }
        let s = r.sinh() / norm;
        let spatial: Vec<f64> = direction.iter().map(|c| c * s).collect();
        Ok(Self::from_spatial_unchecked(&spatial))
    }

    /// Point at geodesic distance `r` from `o` along `e_1`.
    pub fn on_axis(d: usize, r: f64) -> Result<Self> {
        let mut dir = vec![0.0; d.max(1)];
        dir[0] = 1.0;
        Self::polar(d, r, &dir)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Minkowski coordinates `(z_0, ..., z_d)`.
    pub fn coords(&self) -> &[f64] {
        &self.z[..=self.dim]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.z[1..=self.dim]
    }

    pub fn z0(&self) -> f64 {
        self.z[0]
    }

    /// Geodesic distance to the base point `o`.
    pub fn radius(&self) -> f64 {
        self.z[0].max(1.0).acosh()
    }

    /// `|<z,z>_J + 1| / max(1, z_0^2)`.
    pub fn sheet_defect(&self) -> f64 {
        let c = self.coords();
        (mdot(c, c) + 1.0).abs() / c[0].powi(2).max(1.0)
    }

    fn check_on_sheet(&self) -> Result<()> {
        if self.z[0] > 0.0 && self.sheet_defect() <= SHEET_TOL {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "point off the sheet (relative defect {:.3e})",
                self.sheet_defect()
            )))
        }
    }

    /// Advances the point along the geodesic whose initial velocity has frame
    /// coordinates `c` in the canonical frame at the point (see
    /// [`orthonormal_tangent_frame`]). The step length is `|c|` exactly.
    #[inline]
    pub(crate) fn step_in_frame(&mut self, c: &[f64]) {
        let d = self.dim;
        let x0 = self.z[0];
        let mut xc = 0.0;
        let mut s2 = 0.0;
        for i in 0..d {
            xc += self.z[i + 1] * c[i];
            s2 += c[i] * c[i];
        }
        let s = s2.sqrt();
        if s < 1e-12 {
            return;
        }
        let (sh, ch) = (s.sinh(), s.cosh());
        let k = xc / (1.0 + x0);
        let sf = sh / s;
        let mut n2 = 0.0;
        for i in 0..d {
            let xi = self.z[i + 1];
            let vi = c[i] + xi * k;
            let ni = ch * xi + sf * vi;
            self.z[i + 1] = ni;
            n2 += ni * ni;
        }
        self.z[0] = (1.0 + n2).sqrt();
    }
}

/// Distance without sheet validation; both points must share a dimension.
#[inline]
pub(crate) fn distance_unchecked(x: &HPoint, y: &HPoint) -> f64 {
    let c = -mdot(x.coords(), y.coords());
    if c >= 2.0 {
        return c.acosh();
    }
    // Near points: <x-y, x-y>_J = 4 sinh^2(d/2) avoids the cancellation in acosh near 1.
    let (a, b) = (x.coords(), y.coords());
    let mut q = -(a[0] - b[0]).powi(2);
    for i in 1..a.len() {
        q += (a[i] - b[i]).powi(2);
    }
    2.0 * (0.5 * q.max(0.0).sqrt()).asinh()
}

/// Geodesic distance `arccosh(-<x,y>_J)`, evaluated stably for nearby points.
pub fn distance(x: &HPoint, y: &HPoint) -> Result<f64> {
    if x.dim != y.dim {
        return arg_err(format!("dimension mismatch: {} vs {}", x.dim, y.dim));
    }
    x.check_on_sheet()?;
    y.check_on_sheet()?;
    Ok(distance_unchecked(x, y))
}

/// A tangent vector `v` at `base`, with `<base, v>_J = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    base: HPoint,
    v: [f64; COORDS],
}

impl TangentVector {
    pub fn new(base: HPoint, v: &[f64]) -> Result<Self> {
        if v.len() != base.dim + 1 {
            return arg_err(format!("tangent vector has {} entries, expected {}", v.len(), base.dim + 1));
        }
        base.check_on_sheet()?;
        let scale = base.z0() * v.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let ortho = mdot(base.coords(), v);
        if ortho.abs() > SHEET_TOL * scale.max(1.0) {
            return Err(Error::Domain(format!("vector not tangent at base (<x,v>_J = {ortho:.3e})")));
        }
        let norm2 = mdot(v, v);
        if norm2 < -SHEET_TOL * scale.max(1.0).powi(2) {
            return Err(Error::Domain(format!("timelike tangent vector (<v,v>_J = {norm2:.3e})")));
        }
        let mut arr = [0.0; COORDS];
        arr[..v.len()].copy_from_slice(v);
        Ok(Self { base, v: arr })
    }

    /// The tangent vector at `base` with coordinates `c` in the canonical frame there.
    pub fn from_frame_coords(base: HPoint, c: &[f64]) -> Result<Self> {
        if c.len() != base.dim {
            return arg_err(format!("frame coordinates have {} entries, expected {}", c.len(), base.dim));
        }
        let mut arr = [0.0; COORDS];
        transvect_tangent(&base, c, &mut arr);
        Ok(Self { base, v: arr })
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn vector(&self) -> &[f64] {
        &self.v[..=self.base.dim]
    }

    /// Riemannian length `sqrt(<v,v>_J)`.
    pub fn norm(&self) -> f64 {
        let v = self.vector();
        mdot(v, v).max(0.0).sqrt()
    }
}

/// Writes `B(x) (0, c)` into `out`, where `B(x)` is the transvection taking `o` to `x`.
fn transvect_tangent(x: &HPoint, c: &[f64], out: &mut [f64; COORDS]) {
    let d = x.dim;
    let xb = x.spatial();
    let xc: f64 = xb.iter().zip(c).map(|(a, b)| a * b).sum();
    let k = xc / (1.0 + x.z0());
    out[0] = xc;
    for i in 0..d {
        out[i + 1] = c[i] + xb[i] * k;
    }
}

/// Riemannian exponential map `cosh|v| x + sinh|v| v/|v|`, re-projected onto the sheet.
pub fn exp_map(t: &TangentVector) -> Result<HPoint> {
    let v = t.vector();
    let n2 = mdot(v, v);
    let scale = t.base.z0() * v.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if n2 < -SHEET_TOL * scale.max(1.0).powi(2) {
        return Err(Error::Domain(format!("timelike tangent vector (<v,v>_J = {n2:.3e})")));
    }
    let s = n2.max(0.0).sqrt();
    if s < 1e-12 {
        return Ok(t.base);
    }
    let (sh, ch) = (s.sinh(), s.cosh());
    let spatial: Vec<f64> = (1..=t.base.dim).map(|i| ch * t.base.z[i] + sh * v[i] / s).collect();
    HPoint::from_spatial(&spatial)
}

/// The canonical orthonormal frame at `x`: the image of `(e_1, ..., e_d)` under the
/// transvection along the geodesic from `o` to `x`.
pub fn orthonormal_tangent_frame(x: &HPoint) -> Result<Vec<TangentVector>> {
    x.check_on_sheet()?;
    let d = x.dim;
    let mut c = vec![0.0; d];
    (0..d)
        .map(|i| {
            c.iter_mut().for_each(|e| *e = 0.0);
            c[i] = 1.0;
            TangentVector::from_frame_coords(*x, &c)
        })
        .collect()
}

/// An orientation-preserving isometry, stored as a `(d+1) x (d+1)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    m: DMatrix<f64>,
}

impl Isometry {
    /// Validates `A^T J A = J`, `det A > 0` and preservation of the upper sheet.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return arg_err("isometry matrix must be square");
        }
        check_dim(n.saturating_sub(1))?;
        let g = Self { m };
        let defect = g.group_defect();
        let scale = g.m.amax().powi(2).max(1.0);
        if defect > 1e-10 * scale {
            return Err(Error::Domain(format!("matrix does not preserve the form (defect {defect:.3e})")));
        }
        if g.m[(0, 0)] <= 0.0 {
            return Err(Error::Domain("matrix swaps the sheets".into()));
        }
        if g.m.determinant() <= 0.0 {
            return Err(Error::Domain("matrix reverses orientation".into()));
        }
        Ok(g)
    }

    pub fn identity(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self { m: DMatrix::identity(d + 1, d + 1) })
    }

    /// Hyperbolic translation by `s` along the `e_axis` direction (`axis >= 1`).
    pub fn boost(d: usize, axis: usize, s: f64) -> Result<Self> {
        check_dim(d)?;
        if axis == 0 || axis > d {
            return arg_err(format!("boost axis {axis} outside 1..={d}"));
        }
        let mut m = DMatrix::identity(d + 1, d + 1);
        m[(0, 0)] = s.cosh();
        m[(axis, axis)] = s.cosh();
        m[(0, axis)] = s.sinh();
        m[(axis, 0)] = s.sinh();
        Ok(Self { m })
    }

    /// Rotation by `theta` in the `(e_i, e_j)` plane of `T_o H^d`, an element of `K`.
    pub fn rotation(d: usize, i: usize, j: usize, theta: f64) -> Result<Self> {
        check_dim(d)?;
        if i == 0 || j == 0 || i > d || j > d || i == j {
            return arg_err(format!("invalid rotation plane ({i}, {j})"));
        }
        let mut m = DMatrix::identity(d + 1, d + 1);
        let (s, c) = theta.sin_cos();
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        Ok(Self { m })
    }

    /// Embeds a rotation `R in SO(d)` of `T_o H^d` as an isometry fixing `o`.
    pub fn from_rotation(r: &DMatrix<f64>) -> Result<Self> {
        let d = r.nrows();
        check_dim(d)?;
        let mut m = DMatrix::identity(d + 1, d + 1);
        m.view_mut((1, 1), (d, d)).copy_from(r);
        Self::new(m)
    }

    /// Transvection along the geodesic from `o` to `x`.
    pub fn transvection_to(x: &HPoint) -> Self {
        let d = x.dim;
        let x0 = x.z0();
        let xb = x.spatial();
        let mut m = DMatrix::identity(d + 1, d + 1);
        m[(0, 0)] = x0;
        for i in 0..d {
            m[(0, i + 1)] = xb[i];
            m[(i + 1, 0)] = xb[i];
            for j in 0..d {
                m[(i + 1, j + 1)] += xb[i] * xb[j] / (1.0 + x0);
            }
        }
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Entrywise maximum of `|A^T J A - J|`.
    pub fn group_defect(&self) -> f64 {
        let n = self.m.nrows();
        let mut j = DMatrix::identity(n, n);
        j[(0, 0)] = -1.0;
        (self.m.transpose() * &j * &self.m - j).amax()
    }

    /// Group product `self * other` (apply `other` first).
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        if self.dim() != other.dim() {
            return arg_err("dimension mismatch in isometry product");
        }
        Ok(Isometry { m: &self.m * &other.m })
    }

    /// `A^{-1} = J A^T J`.
    pub fn inverse(&self) -> Isometry {
        let n = self.m.nrows();
        let mut inv = self.m.transpose();
        for k in 1..n {
            inv[(0, k)] = -inv[(0, k)];
            inv[(k, 0)] = -inv[(k, 0)];
        }
        Isometry { m: inv }
    }

    pub(crate) fn apply_unchecked(&self, x: &HPoint) -> HPoint {
        let d = x.dim;
        let z = x.coords();
        let mut spatial = [0.0; MAX_DIM];
        for i in 0..d {
            let mut acc = 0.0;
            for (k, zk) in z.iter().enumerate() {
                acc += self.m[(i + 1, k)] * zk;
            }
            spatial[i] = acc;
        }
        HPoint::from_spatial_unchecked(&spatial[..d])
    }
}

/// `g . x`, re-projected onto the sheet.
pub fn apply_isometry(g: &Isometry, x: &HPoint) -> Result<HPoint> {
    if g.dim() != x.dim {
        return arg_err(format!("isometry of dimension {} applied to point of dimension {}", g.dim(), x.dim));
    }
    x.check_on_sheet()?;
    Ok(g.apply_unchecked(x))
}

/// The inverse transvection: the isometry `g` with `g . x = o` moving along the
/// geodesic through `x` and `o`.
pub fn boost_to_origin(x: &HPoint) -> Isometry {
    Isometry::transvection_to(x).inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn minkowski_basis() {
        let e0 = [1.0, 0.0, 0.0];
        let e1 = [0.0, 1.0, 0.0];
        assert_eq!(minkowski_dot(&e0, &e0).unwrap(), -1.0);
        assert_eq!(minkowski_dot(&e1, &e1).unwrap(), 1.0);
        assert_eq!(minkowski_dot(&e0, &e1).unwrap(), 0.0);
        assert!(minkowski_dot(&e0, &[1.0, 0.0]).is_err());
        assert!(minkowski_dot(&[1.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn distance_along_axis() {
        let o = HPoint::origin(3).unwrap();
        assert_eq!(distance(&o, &o).unwrap(), 0.0);
        let x = HPoint::from_coords(&[1f64.cosh(), 1f64.sinh(), 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(distance(&o, &x).unwrap(), 1.0, epsilon = 1e-12);
        let y = HPoint::on_axis(3, 1e-9).unwrap();
        assert_abs_diff_eq!(distance(&o, &y).unwrap(), 1e-9, epsilon = 1e-18);
    }

    #[test]
    fn off_sheet_rejected() {
        assert!(matches!(HPoint::from_coords(&[2.0, 0.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(HPoint::from_coords(&[-1.0, 0.0, 0.0]), Err(Error::Domain(_))));
        assert!(HPoint::origin(1).is_err());
        assert!(HPoint::origin(MAX_DIM + 1).is_err());
    }

    #[test]
    fn exp_map_axis_geodesic() {
        let o = HPoint::origin(2).unwrap();
        for &t in &[0.0, 0.3, 2.0, 7.5] {
            let tv = TangentVector::new(o, &[0.0, t, 0.0]).unwrap();
            let y = exp_map(&tv).unwrap();
            assert_abs_diff_eq!(y.coords()[0], t.cosh(), epsilon = 1e-12 * t.cosh());
            assert_abs_diff_eq!(y.coords()[1], t.sinh(), epsilon = 1e-12 * t.cosh());
            assert_abs_diff_eq!(distance(&o, &y).unwrap(), t, epsilon = 1e-10);
        }
    }

    #[test]
    fn timelike_vector_rejected() {
        let o = HPoint::origin(2).unwrap();
        assert!(TangentVector::new(o, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn canonical_frame_at_origin() {
        let o = HPoint::origin(3).unwrap();
        let frame = orthonormal_tangent_frame(&o).unwrap();
        for (i, f) in frame.iter().enumerate() {
            let mut e = [0.0; 4];
            e[i + 1] = 1.0;
            assert_eq!(f.vector(), &e);
        }
    }

    #[test]
    fn boost_from_origin_closed_form() {
        let o = HPoint::origin(2).unwrap();
        let s = 1.7;
        let g = Isometry::boost(2, 1, s).unwrap();
        let y = apply_isometry(&g, &o).unwrap();
        assert_abs_diff_eq!(y.coords()[0], s.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(y.coords()[1], s.sinh(), epsilon = 1e-12);
        let back = boost_to_origin(&y);
        let o2 = apply_isometry(&back, &y).unwrap();
        assert_abs_diff_eq!(o2.coords()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o2.coords()[1], 0.0, epsilon = 1e-12);
        assert!(Isometry::new(back.matrix().clone()).is_ok());
        // the transvection at the origin is the identity
        assert_eq!(boost_to_origin(&o), Isometry::identity(2).unwrap());
    }

    #[test]
    fn invalid_matrices_rejected() {
        let mut m = DMatrix::identity(3, 3);
        m[(1, 1)] = 2.0;
        assert!(Isometry::new(m).is_err());
        let mut flip = DMatrix::identity(3, 3);
        flip[(0, 0)] = -1.0;
        flip[(1, 1)] = -1.0;
        assert!(Isometry::new(flip).is_err());
        let mut refl = DMatrix::identity(3, 3);
        refl[(2, 2)] = -1.0;
        assert!(Isometry::new(refl).is_err());
    }

    #[test]
    fn tiny_step_is_identity() {
        let mut x = HPoint::on_axis(2, 0.4).unwrap();
        let before = x;
        x.step_in_frame(&[1e-14, 0.0]);
        assert_eq!(x, before);
    }
}
