/// Four-tap bilinear footprint. Taps with zero weight alias their neighbour,
/// so sampling exactly on the last row or column stays inside the grid.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil {
    pub idx: [usize; 4],
    pub weight: [f64; 4],
}

impl Stencil {
    #[inline]
    pub fn apply(&self, mut at: impl FnMut(usize) -> f64) -> f64 {
        self.weight[0] * at(self.idx[0])
            + self.weight[1] * at(self.idx[1])
            + self.weight[2] * at(self.idx[2])
            + self.weight[3] * at(self.idx[3])
    }
}

/// Returns `None` when any tap falls outside the grid or on a masked cell.
pub(crate) fn stencil(width: usize, height: usize, mask: &[bool], x: f64, y: f64) -> Option<Stencil> {
    if !(x.is_finite() && y.is_finite()) {
        return None;
    }
    if x < 0.0 || y < 0.0 || x > (width - 1) as f64 || y > (height - 1) as f64 {
        return None;
    }
    let xf = libm::floor(x);
    let yf = libm::floor(y);
    let fx = x - xf;
    let fy = y - yf;
    let x0 = xf as usize;
    let y0 = yf as usize;
    let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
    let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
    let idx = [
        y0 * width + x0,
        y0 * width + x1,
        y1 * width + x0,
        y1 * width + x1,
    ];
    if idx.iter().any(|&i| !mask[i]) {
        return None;
    }
    let weight = [
        (1.0 - fx) * (1.0 - fy),
        fx * (1.0 - fy),
        (1.0 - fx) * fy,
        fx * fy,
    ];
    Some(Stencil { idx, weight })
}
