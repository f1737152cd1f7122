//! Exact enumeration on a tiny RBM: partition function, visible
//! distribution and a check of the free energy against it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tactile_dbm::boltzmann::{enumerate_states, partition_and_prob, visible_distribution, Model, RbmParams};
use tactile_dbm::connectivity::ConnectivityMask;

fn main() -> tactile_dbm::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut p = RbmParams::init_random(ConnectivityMask::full(4, 3), &mut rng);
    p.weights.mapv_inplace(|_| rng.random_range(-1.5..1.5));

    let dist = visible_distribution(Model::Rbm(&p))?;
    println!("sum of p(v) = {:.12}", dist.iter().sum::<f64>());
    for (v, prob) in enumerate_states(4).zip(&dist) {
        let r = partition_and_prob(&v, Model::Rbm(&p))?;
        // p(v) = exp(-F(v)) / Z must agree with the enumerated distribution.
        let via_free_energy = (-p.free_energy(&v)? - r.log_z).exp();
        println!(
            "v = {:?}  p = {prob:.5}  exp(-F)/Z = {via_free_energy:.5}",
            v.as_array().to_vec()
        );
    }
    Ok(())
}
