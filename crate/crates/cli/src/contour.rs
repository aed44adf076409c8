//! Zero contours of a sampled scalar field by marching squares.

/// Samples on a rectangular lattice; `values[iy * xs.len() + ix]`.
pub struct Field<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub values: &'a [f64],
}

pub type Segment = [[f64; 2]; 2];

impl Field<'_> {
    fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.xs.len() + ix]
    }

    /// Line segments approximating `value = 0`, in lattice order. Saddle
    /// cells are resolved by the sign of the cell average.
    pub fn zero_segments(&self) -> Vec<Segment> {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        assert_eq!(self.values.len(), nx * ny);
        let mut out = Vec::new();
        for iy in 0..ny.saturating_sub(1) {
            for ix in 0..nx.saturating_sub(1) {
                // corners counter-clockwise from the lower left
                let c = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)];
                let v: Vec<f64> = c.iter().map(|&(i, j)| self.at(i, j)).collect();
                if v.iter().any(|x| !x.is_finite()) {
                    continue;
                }
                let p = |k: usize| [self.xs[c[k].0], self.ys[c[k].1]];
                let cross = |e: usize| -> Option<[f64; 2]> {
                    let (a, b) = (e, (e + 1) % 4);
                    if (v[a] > 0.0) == (v[b] > 0.0) {
                        return None;
                    }
                    let s = v[a] / (v[a] - v[b]);
                    let (pa, pb) = (p(a), p(b));
                    Some([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])])
                };
                let hits: Vec<(usize, [f64; 2])> = (0..4).filter_map(|e| cross(e).map(|q| (e, q))).collect();
                match hits.len() {
                    2 => out.push([hits[0].1, hits[1].1]),
                    4 => {
                        // pair the edges around each corner whose sign differs from the centre
                        let centre = v.iter().sum::<f64>() > 0.0;
                        let pairs = if (v[0] > 0.0) == centre { [(0, 1), (2, 3)] } else { [(1, 2), (3, 0)] };
                        for (a, b) in pairs {
                            out.push([hits[a].1, hits[b].1]);
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }
}
