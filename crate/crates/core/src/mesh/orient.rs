use std::collections::{HashMap, VecDeque};

use super::Point3;
use crate::error::{Error, Result};

/// Makes triangle orientation consistent by breadth-first search over face
/// adjacency, then flips each closed component whose signed volume is negative.
pub(super) fn repair(vertices: &[Point3], mut triangles: Vec<[usize; 3]>, closed: bool) -> Result<Vec<[usize; 3]>> {
    let mut incident: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            incident.entry((a.min(b), a.max(b))).or_default().push((t, a < b));
        }
    }
    for (key, list) in &incident {
        if list.len() > 2 {
            return Err(Error::Topology(format!(
                "non-manifold edge ({}, {}) shared by {} triangles",
                key.0,
                key.1,
                list.len()
            )));
        }
    }

    let n = triangles.len();
    let mut flip: Vec<Option<bool>> = vec![None; n];
    let mut component = vec![usize::MAX; n];
    let mut components = 0;
    for seed in 0..n {
        if flip[seed].is_some() {
            continue;
        }
        flip[seed] = Some(false);
        component[seed] = components;
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            let ft = flip[t].unwrap();
            let tri = triangles[t];
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let forward = a < b;
                for &(u, u_forward) in &incident[&(a.min(b), a.max(b))] {
                    if u == t {
                        continue;
                    }
                    // consistent neighbours traverse the shared edge in opposite directions
                    let fu = if u_forward == forward { !ft } else { ft };
                    match flip[u] {
                        None => {
                            flip[u] = Some(fu);
                            component[u] = components;
                            queue.push_back(u);
                        }
                        Some(existing) if existing != fu => {
                            return Err(Error::Orientation(format!(
                                "surface is not orientable (conflict between triangles {t} and {u})"
                            )));
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        components += 1;
    }

    let mut flipped = 0;
    for (tri, f) in triangles.iter_mut().zip(&flip) {
        if f.unwrap() {
            tri.swap(1, 2);
            flipped += 1;
        }
    }
    if flipped > 0 {
        log::debug!("orientation repair flipped {flipped} triangles");
    }

    if closed {
        let mut volume = vec![0.0; components];
        for (t, tri) in triangles.iter().enumerate() {
            volume[component[t]] += vertices[tri[0]].dot(&vertices[tri[1]].cross(&vertices[tri[2]]));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if volume[component[t]] < 0.0 {
                tri.swap(1, 2);
            }
        }
    }
    Ok(triangles)
}
