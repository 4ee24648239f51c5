use std::collections::BTreeSet;

use crate::assembly::connections::instance_edges;
use crate::assembly::{connected_components, detect_connections, Assembly};
use crate::brickfile::ShapeLibrary;

/// Cut every connected component into connected slices of at most `k`
/// bricks. Each slice starts from its lowest remaining id and grows by the
/// neighbour that keeps the largest side of its bounding box smallest (ties
/// by lowest id). Instance ids are kept.
pub fn slice_assembly(assembly: &Assembly, library: &ShapeLibrary, k: usize) -> Vec<Assembly> {
    assert!(k >= 1, "slice size must be positive");
    let edges = instance_edges(&detect_connections(assembly, library));
    let neighbours = |id: u32| -> Vec<u32> {
        edges.iter().filter_map(|&(a, b)| if a == id { Some(b) } else if b == id { Some(a) } else { None }).collect()
    };
    let mut out = Vec::new();
    for component in connected_components(assembly, library) {
        let mut remaining: BTreeSet<u32> = component.ids().into_iter().collect();
        while let Some(&seed) = remaining.first() {
            let mut slice = vec![seed];
            remaining.remove(&seed);
            while slice.len() < k {
                let frontier: BTreeSet<u32> =
                    slice.iter().flat_map(|&s| neighbours(s)).filter(|n| remaining.contains(n)).collect();
                let best = frontier
                    .into_iter()
                    .map(|c| {
                        let mut ids = slice.clone();
                        ids.push(c);
                        let size = assembly.subset(&ids).world_bounds(library).size();
                        (size.x.max(size.y).max(size.z), c)
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let Some((_, c)) = best else { break };
                slice.push(c);
                remaining.remove(&c);
            }
            out.push(assembly.subset(&slice));
        }
    }
    out
}
