use super::{Grid1D, WaveError};

/// Pad height relative to the barrier, emulating hard walls in the periodic box.
pub const PAD_FACTOR: f64 = 1e4;

/// Double-well geometry. The left well is harmonic around `center` up to the
/// height `v0`, which is reached at `barrier_start()`. A square barrier of
/// height `v0` and width `a` follows, then a flat floor of length
/// `floor_length`. Hard walls bound the left well at `center - left_extent`
/// and the floor on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub k_spring: f64,
    pub center: f64,
    pub v0: f64,
    pub a: f64,
    pub floor_length: f64,
    pub left_extent: f64,
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<(), WaveError> {
        let fields = [
            ("k_spring", self.k_spring),
            ("v0", self.v0),
            ("a", self.a),
            ("floor_length", self.floor_length),
            ("left_extent", self.left_extent),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(WaveError::Geometry(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Distance from the well centre at which the harmonic flank reaches `v0`.
    pub fn flank_width(&self) -> f64 {
        (2.0 * self.v0 / self.k_spring).sqrt()
    }

    pub fn barrier_start(&self) -> f64 {
        self.center + self.flank_width()
    }

    pub fn barrier_end(&self) -> f64 {
        self.barrier_start() + self.a
    }

    pub fn barrier_center(&self) -> f64 {
        self.barrier_start() + 0.5 * self.a
    }

    pub fn right_wall(&self) -> f64 {
        self.barrier_end() + self.floor_length
    }

    pub fn left_wall(&self) -> f64 {
        self.center - self.left_extent
    }

    pub fn pad_height(&self) -> f64 {
        PAD_FACTOR * self.v0
    }

    pub fn omega0(&self, mass: f64) -> f64 {
        (self.k_spring / mass).sqrt()
    }

    /// Decay constant under the barrier, `sqrt(2 m (V0 - E))`.
    pub fn beta(&self, energy: f64, mass: f64) -> f64 {
        (2.0 * mass * (self.v0 - energy)).max(0.0).sqrt()
    }

    /// Window of the right well, where the kick lasers act.
    pub fn right_window(&self) -> (f64, f64) {
        (self.barrier_end(), self.right_wall())
    }

    pub fn value(&self, x: f64) -> f64 {
        if x < self.left_wall() || x >= self.right_wall() {
            self.pad_height()
        } else if x < self.barrier_start() {
            0.5 * self.k_spring * (x - self.center).powi(2)
        } else if x < self.barrier_end() {
            self.v0
        } else {
            0.0
        }
    }
}

/// Sample the double well on the grid. Both walls need at least eight pad
/// points inside the box.
pub fn build_potential(spec: &PotentialSpec, grid: &Grid1D) -> Result<Vec<f64>, WaveError> {
    spec.validate()?;
    let margin = 8.0 * grid.dx();
    if spec.left_wall() < grid.x_min + margin || spec.right_wall() > grid.x_max - margin {
        return Err(WaveError::Geometry(format!(
            "walls [{}, {}] do not fit inside [{}, {}] with pads",
            spec.left_wall(),
            spec.right_wall(),
            grid.x_min,
            grid.x_max
        )));
    }
    if spec.a < grid.dx() {
        return Err(WaveError::Geometry(format!("barrier width {} below dx = {}", spec.a, grid.dx())));
    }
    Ok(grid.xs().into_iter().map(|x| spec.value(x)).collect())
}

/// Square barrier of height `v0` on `[start, start + a)` with pads of height
/// `pad` in the outer `pad_width` of each side.
pub fn barrier_potential(grid: &Grid1D, v0: f64, start: f64, a: f64, pad: f64, pad_width: f64) -> Vec<f64> {
    grid.xs()
        .into_iter()
        .map(|x| {
            if x < grid.x_min + pad_width || x >= grid.x_max - pad_width {
                pad
            } else if x >= start && x < start + a {
                v0
            } else {
                0.0
            }
        })
        .collect()
}
