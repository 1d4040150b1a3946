//! Polyline CSV with columns
//! `poly_id, vertex_id, x, y, theta, index, hx, hy, schema_version`.
//! Missing angles and indices are empty cells.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use super::extract::{PolyVertex, SingularPolyline};
use crate::error::{Error, Result};
use crate::fields::SCHEMA_VERSION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolylineRow {
    pub poly_id: usize,
    pub vertex_id: usize,
    pub x: f64,
    pub y: f64,
    pub theta: Option<f64>,
    pub index: Option<usize>,
    pub hx: f64,
    pub hy: f64,
    pub schema_version: u32,
}

pub fn write_polylines_csv<W: Write>(w: W, polylines: &[SingularPolyline]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (pid, p) in polylines.iter().enumerate() {
        for (vid, v) in p.vertices.iter().enumerate() {
            out.serialize(PolylineRow {
                poly_id: pid,
                vertex_id: vid,
                x: v.point[0],
                y: v.point[1],
                theta: v.theta,
                index: v.index,
                hx: v.contour_point[0],
                hy: v.contour_point[1],
                schema_version: SCHEMA_VERSION,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads polylines back; they are closed and residuals are not stored.
pub fn read_polylines_csv<R: Read>(r: R) -> Result<Vec<SingularPolyline>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut polys: Vec<SingularPolyline> = Vec::new();
    for row in rdr.deserialize() {
        let row: PolylineRow = row?;
        if row.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema_version {}",
                row.schema_version
            )));
        }
        if row.poly_id == polys.len() {
            polys.push(SingularPolyline {
                vertices: Vec::new(),
                closed: true,
            });
        }
        let poly = polys
            .get_mut(row.poly_id)
            .ok_or_else(|| Error::InvalidParameter(format!("poly_id {} out of order", row.poly_id)))?;
        if row.vertex_id != poly.vertices.len() {
            return Err(Error::InvalidParameter(format!(
                "vertex_id {} out of order in polyline {}",
                row.vertex_id, row.poly_id
            )));
        }
        poly.vertices.push(PolyVertex {
            point: [row.x, row.y],
            theta: row.theta,
            index: row.index,
            contour_point: [row.hx, row.hy],
            residual: f64::NAN,
            refined: true,
        });
    }
    Ok(polys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let v = |x: f64, t: Option<f64>| PolyVertex {
            point: [x, 0.5],
            theta: t,
            index: t.map(|_| 1),
            contour_point: [x * 2.0, -1.0],
            residual: 0.0,
            refined: true,
        };
        let polys = vec![
            SingularPolyline {
                vertices: vec![v(0.1, Some(0.3)), v(0.2, None)],
                closed: true,
            },
            SingularPolyline {
                vertices: vec![v(0.7, Some(2.0))],
                closed: true,
            },
        ];
        let mut buf = Vec::new();
        write_polylines_csv(&mut buf, &polys).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("poly_id,vertex_id,x,y,theta,index,hx,hy,schema_version\n"));
        assert!(text.contains("0,1,0.2,0.5,,,0.4,-1.0,1"));
        let back = read_polylines_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].vertices[1].theta, None);
        assert_eq!(back[1].vertices[0].point, [0.7, 0.5]);
    }
}
