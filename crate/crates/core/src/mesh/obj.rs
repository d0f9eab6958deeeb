//! ASCII Wavefront OBJ reading and writing (geometry and faces only).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{MeshError, TriMesh, Vec3};

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriMesh, MeshError> {
    let file = File::open(path)?;
    parse_obj(BufReader::new(file))
}

/// Parses `v` and `f` records; everything else is ignored. Polygons are
/// fan-triangulated from their first corner.
pub fn parse_obj<R: BufRead>(reader: R) -> Result<TriMesh, MeshError> {
    let mut vertices = Vec::new();
    // (face, line) so index errors can name the offending line
    let mut faces: Vec<([i64; 3], usize)> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| MeshError::Parse {
                        line: lineno,
                        msg: format!("bad vertex coordinate: {e}"),
                    })?;
                if coords.len() != 3 {
                    return Err(MeshError::Parse {
                        line: lineno,
                        msg: "vertex needs three coordinates".into(),
                    });
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut corners = Vec::new();
                for tok in tokens {
                    let head = tok.split('/').next().unwrap_or("");
                    let idx: i64 = head.parse().map_err(|_| MeshError::Parse {
                        line: lineno,
                        msg: format!("bad face index `{tok}`"),
                    })?;
                    let resolved = match idx {
                        0 => {
                            return Err(MeshError::Index {
                                index: 0,
                                count: vertices.len(),
                                line: Some(lineno),
                            })
                        }
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 {
                        return Err(MeshError::Index {
                            index: idx,
                            count: vertices.len(),
                            line: Some(lineno),
                        });
                    }
                    corners.push(resolved);
                }
                if corners.len() < 3 {
                    return Err(MeshError::Parse {
                        line: lineno,
                        msg: "face needs at least three vertices".into(),
                    });
                }
                for k in 1..corners.len() - 1 {
                    faces.push(([corners[0], corners[k], corners[k + 1]], lineno));
                }
            }
            _ => {}
        }
    }

    if vertices.is_empty() {
        return Err(MeshError::Empty("vertices"));
    }
    if faces.is_empty() {
        return Err(MeshError::Empty("faces"));
    }
    let n = vertices.len();
    let mut out = Vec::with_capacity(faces.len());
    for (f, line) in faces {
        if let Some(&bad) = f.iter().find(|&&i| i as usize >= n) {
            return Err(MeshError::Index {
                index: bad + 1,
                count: n,
                line: Some(line),
            });
        }
        out.push([f[0] as usize, f[1] as usize, f[2] as usize]);
    }
    TriMesh::new(vertices, out)
}

pub fn save_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_obj(mesh, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_obj<W: Write>(mesh: &TriMesh, w: &mut W) -> Result<(), MeshError> {
    for v in mesh.vertices() {
        writeln!(w, "v {:.12e} {:.12e} {:.12e}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}
