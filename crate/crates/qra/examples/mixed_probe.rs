use qra::codec::{encode_f, Plaintext};
use qra::harness::SeedScheme;
use qra::reservoir::{run_sequence, NoiseProfile, ReservoirConfig};
use qra::solvers::{als_single_c, KeySet};
use qra::state::SimMode;

fn main() {
    let scheme = SeedScheme::new(42);
    for nq in [6usize, 10] {
        let nc = 5;
        // Streams as the harness derives them for reset_shot (tag 2).
        let mut key_rng = scheme.stream("keys", &[2, 0, 0, nc as u64]);
        let keys = KeySet::generate(nc, nq, &mut key_rng);
        let mut pa_rng = scheme.stream("noise_profile_a", &[2, 0, 0]);
        let profile_a = NoiseProfile::sample(nq, &mut pa_rng);
        let mut pb_rng = scheme.stream("noise_profile_b", &[2, 0, 0]);
        let profile_b = NoiseProfile::sample(nq, &mut pb_rng);
        let mut plain_rng = scheme.stream("plaintexts_train", &[2, 0, 0, nc as u64]);
        let c = Plaintext::random(nc, &mut plain_rng).unwrap();

        let config = ReservoirConfig::new(nq, SimMode::Mixed).unwrap();
        let e_a = encode_f(&keys.a, &c).unwrap();
        let v = run_sequence(&e_a, &profile_a, &config).unwrap();
        let svd = nalgebra::linalg::SVD::new(v.as_matrix().clone(), false, false);
        let sv: Vec<String> = svd.singular_values.iter().map(|s| format!("{s:.2e}")).collect();
        println!("nq={nq} mixed: singular values of V_a = [{}]", sv.join(", "));
        let zrange: Vec<String> = (0..nc).map(|t| format!("{:.4}", v.as_matrix()[(t, 0)])).collect();
        println!("  <Z_0> per step: [{}]", zrange.join(", "));

        // Exact mixed-mode ALS (no shots): does the ideal-path chain survive?
        let mut shot_rng = scheme.stream("shot_noise", &[2, 0, 0, nc as u64, 0]);
        let trace = als_single_c(&c, &keys, &profile_a, &profile_b, &config, 1e-10, 3, &mut shot_rng).unwrap();
        println!("  exact mixed ALS loss: {:?}", trace.loss.iter().map(|l| format!("{l:.2e}")).collect::<Vec<_>>());
    }
}
