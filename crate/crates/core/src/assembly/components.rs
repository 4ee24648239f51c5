use std::collections::BTreeMap;

use crate::assembly::connections::{detect_connections, instance_edges};
use crate::assembly::Assembly;
use crate::brickfile::ShapeLibrary;

fn find(parent: &mut BTreeMap<u32, u32>, x: u32) -> u32 {
    let mut root = x;
    while parent[&root] != root {
        root = parent[&root];
    }
    let mut cur = x;
    while parent[&cur] != root {
        let next = parent[&cur];
        parent.insert(cur, root);
        cur = next;
    }
    root
}

/// Partition by connectivity; components ordered by smallest instance id.
pub fn connected_components(assembly: &Assembly, library: &ShapeLibrary) -> Vec<Assembly> {
    let mut parent: BTreeMap<u32, u32> = assembly.ids().into_iter().map(|i| (i, i)).collect();
    for (x, y) in instance_edges(&detect_connections(assembly, library)) {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx != ry {
            parent.insert(rx.max(ry), rx.min(ry));
        }
    }
    let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for id in assembly.ids() {
        let root = find(&mut parent, id);
        groups.entry(root).or_default().push(id);
    }
    // Roots are always the smallest member, so map order is the required order.
    groups.values().map(|ids| assembly.subset(ids)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::BrickInstance;
    use crate::brickfile::{load_shape_library, LibraryConfig};
    use crate::math::{Mat3, Vec3};

    #[test]
    fn stacked_pair_and_loner() {
        let lib = load_shape_library(&LibraryConfig::default()).unwrap();
        let mut a = Assembly::new();
        a.insert(BrickInstance::new(0, 3001, 4, Mat3::identity(), Vec3::new(500.0, 0.0, 0.0)));
        a.insert(BrickInstance::new(0, 3001, 4, Mat3::identity(), Vec3::zeros()));
        a.insert(BrickInstance::new(0, 3001, 4, Mat3::identity(), Vec3::new(0.0, -24.0, 0.0)));
        let comps = connected_components(&a, &lib);
        assert_eq!(comps.iter().map(|c| c.ids()).collect::<Vec<_>>(), vec![vec![1], vec![2, 3]]);
        assert!(connected_components(&Assembly::new(), &lib).is_empty());
    }
}
