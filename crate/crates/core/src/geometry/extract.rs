//! Marching squares on `det Dh` over the periodic grid.
//!
//! Every crossed edge carries one vertex refined along the edge. Each edge
//! borders two cells on the torus, so every vertex has degree two and every
//! polyline is closed. Ambiguous cells are paired by the sign at the cell
//! center and routed through the saddle of the bilinear interpolant.

use serde::{Deserialize, Serialize};

use super::{lift, wrap, wrap_delta, GridSpec};
use crate::error::Result;
use crate::fields::FieldRealization;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyVertex {
    /// Chart point, wrapped into the fundamental domain.
    pub point: [f64; 2],
    pub theta: Option<f64>,
    pub index: Option<usize>,
    /// `h(point)`.
    pub contour_point: [f64; 2],
    /// `|det Dh|` at the vertex.
    pub residual: f64,
    /// `false` for interpolated saddle vertices.
    pub refined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPolyline {
    pub vertices: Vec<PolyVertex>,
    pub closed: bool,
}

impl SingularPolyline {
    /// Consecutive vertex pairs, including the closing one.
    pub fn segments(&self) -> impl Iterator<Item = (&PolyVertex, &PolyVertex)> {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub polylines: Vec<SingularPolyline>,
    pub period: f64,
    /// Root-mean-square gradient size on the grid; sets the scale below
    /// which both gradients count as vanishing.
    pub gradient_scale: f64,
    /// Vertices where both gradients vanish; they keep their position but
    /// carry no angle or index.
    pub degenerate_vertices: usize,
    /// Vertices with an angle but no index.
    pub cusp_like_vertices: usize,
    pub saddle_cells: usize,
    /// Largest relative residual over refined vertices.
    pub max_relative_residual: f64,
}

impl Extraction {
    pub fn vertices(&self) -> impl Iterator<Item = &PolyVertex> {
        self.polylines.iter().flat_map(|p| p.vertices.iter())
    }
}

/// `det Dh` and its gradient at `p`.
fn det_and_grad(real: &FieldRealization, p: [f64; 2]) -> (f64, [f64; 2], f64) {
    let (jf, jg) = real.raw_jet(p);
    let (fx, fy, gx, gy) = (jf[1], jf[2], jg[1], jg[2]);
    let d = fx * gy - fy * gx;
    let dx = jf[3] * gy + fx * jg[4] - jf[4] * gx - fy * jg[3];
    let dy = jf[4] * gy + fx * jg[5] - jf[5] * gx - fy * jg[4];
    (d, [dx, dy], fx.hypot(fy) * gx.hypot(gy))
}

/// Root of `det Dh` on the segment `p0 + t step`, `t in [0, 1]`, by Newton
/// with bisection safeguard.
fn refine_edge(real: &FieldRealization, p0: [f64; 2], step: [f64; 2], d0: f64, d1: f64, grid: &GridSpec) -> [f64; 2] {
    let at = |t: f64| [p0[0] + t * step[0], p0[1] + t * step[1]];
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut t = (d0 / (d0 - d1)).clamp(0.0, 1.0);
    let max_iter = grid.refinement + 60;
    for _ in 0..max_iter {
        let (d, g, _) = det_and_grad(real, at(t));
        if d.abs() <= grid.tolerance {
            break;
        }
        if (d >= 0.0) == (d0 >= 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        let slope = g[0] * step[0] + g[1] * step[1];
        let newton = t - d / slope;
        t = if newton > lo && newton < hi && slope != 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    at(t)
}

struct Builder<'a> {
    real: &'a FieldRealization,
    period: f64,
    scale: f64,
    vertices: Vec<PolyVertex>,
    adj: Vec<[usize; 2]>,
    deg: Vec<u8>,
}

impl Builder<'_> {
    fn push(&mut self, p: [f64; 2], refined: bool) -> usize {
        let p = [wrap(p[0], self.period), wrap(p[1], self.period)];
        let jet = self.real.eval_jet(p);
        let (theta, index) = lift(&jet, self.scale);
        self.vertices.push(PolyVertex {
            point: p,
            theta,
            index,
            contour_point: [jet.f, jet.g],
            residual: jet.det_dh().abs(),
            refined,
        });
        self.adj.push([usize::MAX; 2]);
        self.deg.push(0);
        self.vertices.len() - 1
    }

    fn link(&mut self, a: usize, b: usize) {
        for (u, v) in [(a, b), (b, a)] {
            let d = self.deg[u] as usize;
            assert!(d < 2, "marching-squares vertex with degree > 2");
            self.adj[u][d] = v;
            self.deg[u] += 1;
        }
    }
}

/// Extracts the closed polylines of `{det Dh = 0}`.
pub fn extract_critical_curve(real: &FieldRealization, grid: &GridSpec) -> Result<Extraction> {
    grid.validate()?;
    let n = grid.resolution;
    let period = real.period();
    let h = period / n as f64;
    let [fx, fy, gx, gy] = real.grid_gradients(n, grid.origin);
    let det: Vec<f64> = (0..n * n).map(|k| fx[k] * gy[k] - fy[k] * gx[k]).collect();
    let scale = ((0..n * n)
        .map(|k| fx[k] * fx[k] + fy[k] * fy[k] + gx[k] * gx[k] + gy[k] * gy[k])
        .sum::<f64>()
        / (n * n) as f64)
        .sqrt();
    let node = |i: usize, j: usize| (i % n) * n + (j % n);
    let pos = |i: usize, j: usize| [grid.origin[0] + i as f64 * h, grid.origin[1] + j as f64 * h];

    let mut b = Builder {
        real,
        period,
        scale,
        vertices: Vec::new(),
        adj: Vec::new(),
        deg: Vec::new(),
    };
    // edge id: 2 * node for the +x edge, 2 * node + 1 for the +y edge
    let mut edge_vertex = vec![usize::MAX; 2 * n * n];
    let mut saddle_cells = 0;

    let mut vertex_on = |b: &mut Builder, i: usize, j: usize, along_y: bool| -> usize {
        let id = 2 * node(i, j) + usize::from(along_y);
        if edge_vertex[id] == usize::MAX {
            let (i1, j1) = if along_y { (i, j + 1) } else { (i + 1, j) };
            let step = if along_y { [0.0, h] } else { [h, 0.0] };
            let p = refine_edge(real, pos(i, j), step, det[node(i, j)], det[node(i1, j1)], grid);
            edge_vertex[id] = b.push(p, true);
        }
        edge_vertex[id]
    };

    for i in 0..n {
        for j in 0..n {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let d = corners.map(|(a, c)| det[node(a, c)]);
            let s = d.map(|v| v >= 0.0);
            // edges e0..e3 between corners (0,1), (1,2), (3,2), (0,3)
            let edges = [
                (0, 1, i, j, false),
                (1, 2, i + 1, j, true),
                (3, 2, i, j + 1, false),
                (0, 3, i, j, true),
            ];
            let crossed: Vec<usize> = (0..4).filter(|&e| s[edges[e].0] != s[edges[e].1]).collect();
            match crossed.len() {
                0 => {}
                2 => {
                    let [a, c] = [crossed[0], crossed[1]].map(|e| {
                        let (_, _, ei, ej, y) = edges[e];
                        vertex_on(&mut b, ei, ej, y)
                    });
                    b.link(a, c);
                }
                4 => {
                    saddle_cells += 1;
                    let v = [0, 1, 2, 3].map(|e| {
                        let (_, _, ei, ej, y) = edges[e];
                        vertex_on(&mut b, ei, ej, y)
                    });
                    let c = pos(i, j);
                    let center = det_and_grad(real, [c[0] + 0.5 * h, c[1] + 0.5 * h]).0;
                    let e = d[0] - d[1] - d[3] + d[2];
                    let (ss, tt) = if e != 0.0 {
                        (((d[0] - d[3]) / e).clamp(0.0, 1.0), ((d[0] - d[1]) / e).clamp(0.0, 1.0))
                    } else {
                        (0.5, 0.5)
                    };
                    let sp = [c[0] + ss * h, c[1] + tt * h];
                    let pairs = if (center >= 0.0) == s[0] {
                        [(v[0], v[1]), (v[2], v[3])]
                    } else {
                        [(v[0], v[3]), (v[1], v[2])]
                    };
                    for (a, z) in pairs {
                        let m = b.push(sp, false);
                        b.link(a, m);
                        b.link(m, z);
                    }
                }
                _ => unreachable!("a cell has an even number of sign changes"),
            }
        }
    }

    let mut visited = vec![false; b.vertices.len()];
    let mut polylines = Vec::new();
    for start in 0..b.vertices.len() {
        if visited[start] {
            continue;
        }
        let mut verts = Vec::new();
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            visited[cur] = true;
            verts.push(b.vertices[cur].clone());
            let next = if b.adj[cur][0] == prev {
                b.adj[cur][1]
            } else {
                b.adj[cur][0]
            };
            prev = cur;
            cur = next;
            if cur == start {
                break;
            }
        }
        polylines.push(SingularPolyline {
            vertices: verts,
            closed: true,
        });
    }

    let mut degenerate = 0;
    let mut cusp_like = 0;
    let mut max_rel = 0.0f64;
    for v in &b.vertices {
        match (v.theta, v.index) {
            (None, _) => degenerate += 1,
            (Some(_), None) => cusp_like += 1,
            _ => {}
        }
        if v.refined {
            let (_, _, sc) = det_and_grad(real, v.point);
            if sc > 0.0 {
                max_rel = max_rel.max(v.residual / sc);
            }
        }
    }
    Ok(Extraction {
        polylines,
        period,
        gradient_scale: scale,
        degenerate_vertices: degenerate,
        cusp_like_vertices: cusp_like,
        saddle_cells,
        max_relative_residual: max_rel,
    })
}

/// Shortest chart displacement between two wrapped points.
pub fn displacement(a: [f64; 2], b: [f64; 2], period: f64) -> [f64; 2] {
    [wrap_delta(b[0] - a[0], period), wrap_delta(b[1] - a[1], period)]
}
