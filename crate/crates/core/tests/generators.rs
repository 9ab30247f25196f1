use linksched::engine::{is_bipartite, run_evacuation};
use linksched::report::InstanceSpec;
use linksched::schedulers::Policy;
use linksched::topogen::{
    assign_random_multiplicities, gen_grid, gen_path_special, gen_random_bipartite,
    gen_random_connected, gen_regular_multigraph, gen_triangular_mesh, is_connected,
};
use proptest::prelude::*;

#[test]
fn special_instance_family() {
    for n in [1usize, 3, 10, 100] {
        let inst = gen_path_special(n).unwrap();
        assert_eq!(inst.topo.node_count(), 2 * n + 1);
        assert_eq!(inst.topo.link_count(), 2 * n);
        assert_eq!(inst.max_workload(), n as u64 + 1);
        assert!(is_bipartite(&inst.topo).is_some());
        let expected: Vec<u64> = (0..2 * n)
            .map(|l| if l % 2 == 0 { n as u64 } else { 1 })
            .collect();
        assert_eq!(inst.packets, expected);
    }
}

#[test]
fn node_based_policies_drain_special_instance_in_n_plus_one() {
    for n in [3usize, 10] {
        let inst = gen_path_special(n).unwrap();
        for p in [Policy::Nsb, Policy::LcNsb, Policy::Mvm] {
            assert_eq!(
                run_evacuation(&inst, &p).unwrap().evac_time,
                Some(n as u64 + 1),
                "{p} N={n}"
            );
        }
    }
}

#[test]
fn paper_scale_counts() {
    let rand = gen_random_connected(100, 248, 42).unwrap();
    assert_eq!(rand.link_count(), 248);
    let inst = assign_random_multiplicities(&rand, 50, 42);
    assert!(inst.max_workload() > 50);
    let regm = gen_regular_multigraph(50, 80, 42).unwrap();
    assert!(regm.workloads().iter().all(|&w| w == 80));
}

#[test]
fn instance_specs_build() {
    let grid = InstanceSpec::Grid { rows: 4, cols: 4 };
    assert_eq!(grid.label(), "grid4x4");
    assert_eq!(grid.topology().unwrap().link_count(), 24);
    assert!(grid.instance(None, 1).is_err());
    assert_eq!(grid.instance(Some(0), 1).unwrap().total_packets(), 0);
    let fig9 = InstanceSpec::Fig9 { n: 5 };
    assert_eq!(fig9.instance(None, 0).unwrap().max_workload(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_connected_is_connected(n in 2usize..40, extra in 0usize..60, seed in any::<u64>()) {
        let m = (n - 1 + extra).min(n * (n - 1) / 2);
        let g = gen_random_connected(n, m, seed).unwrap();
        prop_assert_eq!(g.link_count(), m);
        prop_assert!(is_connected(&g));
    }

    #[test]
    fn regular_multigraph_is_regular(n in 2usize..30, d in 0usize..12, seed in any::<u64>()) {
        let r = gen_regular_multigraph(n, d, seed);
        if n * d % 2 == 1 {
            prop_assert!(r.is_err());
        } else {
            let inst = r.unwrap();
            prop_assert!(inst.workloads().iter().all(|&w| w == d as u64));
        }
    }

    #[test]
    fn mesh_is_connected_and_seeded(n in 3usize..60, seed in any::<u64>()) {
        let g = gen_triangular_mesh(n, seed).unwrap();
        prop_assert_eq!(g.node_count(), n);
        prop_assert!(is_connected(&g));
        prop_assert_eq!(g, gen_triangular_mesh(n, seed).unwrap());
    }

    #[test]
    fn bipartite_generator_is_bipartite(l in 1usize..7, r in 1usize..7, seed in any::<u64>()) {
        let inst = gen_random_bipartite(l, r, 0.5, 5, seed).unwrap();
        prop_assert!(is_bipartite(&inst.topo).is_some());
    }

    #[test]
    fn grids_are_bipartite(rows in 2usize..8, cols in 2usize..8) {
        let g = gen_grid(rows, cols).unwrap();
        prop_assert_eq!(g.link_count(), rows * (cols - 1) + cols * (rows - 1));
        prop_assert!(is_bipartite(&g).is_some());
    }
}
