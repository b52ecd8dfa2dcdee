//! Fixtures shared by the benchmarks.

use lateration::{
    apply_noise, find_laterative_ordering, geometric_graph, sample_domain, CliqueStrategy, Configuration,
    DissimilarityGraph, DomainSpec, NoiseSpec,
};

/// A laterable noisy geometric graph on the hollow square `Ω(0.2, 1)`, with
/// its latent configuration. Radius is chosen so the expected degree stays
/// near 40 as `n` grows. Redraws until the graph is laterable.
pub fn laterable_instance(n: usize, sigma2: f64, seed: u64) -> (Configuration, DissimilarityGraph) {
    let domain = DomainSpec::new(0.2, 1.0).expect("valid domain");
    let radius = (40.0 * 3.84 / (std::f64::consts::PI * n as f64)).sqrt();
    for attempt in 0..100 {
        let latent = sample_domain(&domain, n, seed.wrapping_add(attempt)).expect("sampling");
        let graph = geometric_graph(&latent, radius).expect("graph");
        if find_laterative_ordering(&graph, 2, &CliqueStrategy::default())
            .expect("search")
            .is_some()
        {
            let (noisy, _) = apply_noise(&graph, &NoiseSpec::additive(sigma2, seed)).expect("noise");
            return (latent, noisy);
        }
    }
    panic!("no laterable draw for n = {n}");
}
