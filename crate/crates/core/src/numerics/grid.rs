use crate::{Error, Result};

/// Uniform time grid on `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t0 >= t1 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs t0 < T, got [{t0}, {t1}]"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("time grid needs at least one step".into()));
        }
        Ok(Self { t0, t1, steps })
    }

    /// Grid with `ceil((t1 - t0) * steps_per_unit)` steps.
    pub fn with_resolution(t0: f64, t1: f64, steps_per_unit: usize) -> Result<Self> {
        let steps = ((t1 - t0) * steps_per_unit as f64).ceil().max(1.0) as usize;
        Self::new(t0, t1, steps)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes()).map(|k| self.time(k)).collect()
    }

    /// Index of the cell containing `t` and the fractional position inside it.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let s = ((t - self.t0) / self.dt()).clamp(0.0, self.steps as f64);
        let k = (s.floor() as usize).min(self.steps - 1);
        (k, s - k as f64)
    }
}

/// One axis of a tensor grid.
///
/// Symmetric axes (`lo = -hi`, odd node count) place node `i` at exactly
/// `(i - c) h` with `c` the centre index, so the node set is closed under
/// `x ↦ -x` bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    lo: f64,
    hi: f64,
    nodes: usize,
    symmetric: bool,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "axis needs lower < upper, got [{lo}, {hi}]"
            )));
        }
        if nodes < 3 {
            return Err(Error::InvalidParameter(format!(
                "axis needs at least 3 nodes, got {nodes}"
            )));
        }
        let symmetric = lo == -hi && nodes % 2 == 1;
        Ok(Self { lo, hi, nodes, symmetric })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.nodes - 1) as f64
    }

    fn centre(&self) -> usize {
        (self.nodes - 1) / 2
    }

    pub fn node(&self, i: usize) -> f64 {
        if self.symmetric {
            let c = self.centre();
            if i >= c {
                (i - c) as f64 * self.spacing()
            } else {
                -((c - i) as f64 * self.spacing())
            }
        } else if i + 1 == self.nodes {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    /// Index of the node mirrored through the origin (symmetric axes only).
    pub fn mirror(&self, i: usize) -> Option<usize> {
        self.symmetric.then(|| self.nodes - 1 - i)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Linear interpolation stencil `(i0, i1, w)` with value `(1-w) u[i0] + w u[i1]`.
    ///
    /// On symmetric axes the stencil of `-x` is the mirror image of the
    /// stencil of `x` with the identical weight.
    pub fn stencil(&self, x: f64) -> (usize, usize, f64) {
        let h = self.spacing();
        if self.symmetric {
            let c = self.centre();
            let a = (x / h).abs();
            let (k, w) = if a >= c as f64 {
                (c - 1, 1.0)
            } else {
                let k = a.floor() as usize;
                (k, a - k as f64)
            };
            if x >= 0.0 {
                (c + k, c + k + 1, w)
            } else {
                (c - k, c - k - 1, w)
            }
        } else {
            let s = ((x - self.lo) / h).clamp(0.0, (self.nodes - 1) as f64);
            let k = (s.floor() as usize).min(self.nodes - 2);
            (k, k + 1, s - k as f64)
        }
    }
}

/// Tensor grid in one or two space dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    axes: Vec<Axis>,
}

impl SpaceGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        match axes.len() {
            1 | 2 => Ok(Self { axes }),
            d => Err(Error::InvalidParameter(format!(
                "space grids support dimension 1 or 2, got {d}"
            ))),
        }
    }

    /// `[-half_width, half_width]^dim` with `nodes` (odd) nodes per axis.
    pub fn symmetric(dim: usize, half_width: f64, nodes: usize) -> Result<Self> {
        if nodes % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "symmetric grid needs an odd node count so that 0 is a node, got {nodes}"
            )));
        }
        let axis = Axis::new(-half_width, half_width, nodes)?;
        Self::new(vec![axis; dim])
    }

    /// Symmetric grid with spacing as close to `dx` as an odd node count allows.
    pub fn symmetric_with_spacing(dim: usize, half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {dx}")));
        }
        let half = (half_width / dx).round().max(1.0) as usize;
        Self::symmetric(dim, half_width, 2 * half + 1)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::nodes).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_symmetric(&self) -> bool {
        self.axes.iter().all(Axis::is_symmetric)
    }

    /// Flat index, first axis slowest.
    pub fn index(&self, ix: &[usize]) -> usize {
        match self.axes.len() {
            1 => ix[0],
            _ => ix[0] * self.axes[1].nodes() + ix[1],
        }
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        match self.axes.len() {
            1 => [flat, 0],
            _ => {
                let ny = self.axes[1].nodes();
                [flat / ny, flat % ny]
            }
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let ix = self.multi_index(flat);
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| a.node(ix[k]))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.axes.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    /// Clamp a point onto the grid box; returns whether it was outside.
    pub fn clamp(&self, x: &mut [f64]) -> bool {
        let mut outside = false;
        for (a, v) in self.axes.iter().zip(x.iter_mut()) {
            if *v < a.lo() {
                *v = a.lo();
                outside = true;
            } else if *v > a.hi() {
                *v = a.hi();
                outside = true;
            }
        }
        outside
    }

    /// Smallest half-width over the axes.
    pub fn half_width(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.hi().min(-a.lo()))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_rejects_bad_input() {
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        let g = TimeGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.dt(), 0.5);
        assert_eq!(g.time(4), 2.0);
        assert_eq!(g.locate(0.75), (1, 0.5));
        assert_eq!(g.locate(2.0), (3, 1.0));
    }

    #[test]
    fn symmetric_axis_nodes_mirror_exactly() {
        let a = Axis::new(-1.3, 1.3, 131).unwrap();
        assert!(a.is_symmetric());
        assert_eq!(a.node(65), 0.0);
        for i in 0..131 {
            assert_eq!(a.node(i), -a.node(a.mirror(i).unwrap()));
        }
    }

    #[test]
    fn symmetric_stencil_mirrors() {
        let a = Axis::new(-2.0, 2.0, 41).unwrap();
        for &x in &[0.0123, 0.35, 1.99, 0.1, 1.0] {
            let (i0, i1, w) = a.stencil(x);
            let (j0, j1, v) = a.stencil(-x);
            assert_eq!(w, v);
            assert_eq!(a.mirror(i0), Some(j0));
            assert_eq!(a.mirror(i1), Some(j1));
            let interp = (1.0 - w) * a.node(i0) + w * a.node(i1);
            assert!((interp - x).abs() < 1e-14);
        }
        let (i0, i1, w) = a.stencil(5.0);
        assert_eq!((i0, i1, w), (39, 40, 1.0));
    }

    #[test]
    fn grid_requires_odd_nodes_and_small_dim() {
        assert!(SpaceGrid::symmetric(1, 1.0, 10).is_err());
        assert!(SpaceGrid::symmetric(3, 1.0, 11).is_err());
        assert!(Axis::new(0.0, 1.0, 2).is_err());
        let g = SpaceGrid::symmetric_with_spacing(2, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 21 * 21);
        assert_eq!(g.point(g.index(&[10, 20])), vec![0.0, 1.0]);
    }
}
