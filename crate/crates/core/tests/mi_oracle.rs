//! Monte-Carlo genie-aided bit-channel MI against the GA profile, in both
//! decoder views of the protocol.

use polar_ot::channel::{add_noise, llr_map, modulate};
use polar_ot::construct::{snr_for_i0, HalfSplit};
use polar_ot::optimize::{inner_topk, Pairing};
use polar_ot::polar::apply_index_perm_inv;
use polar_ot::proto::view_decodable;
use polar_ot::scdec::{Combine, FrozenSpec, ScDecoder};
use polar_ot::{BitPermutation, ChannelParams, MiProfile, SessionPlan, SplitMix64};

const TRIALS: u64 = 100_000;

/// `1 − E[log2(1 + e^{−(1−2u)L})]` per `u` index, where `L` is the SC
/// decision LLR with every earlier bit supplied by a genie. `view` selects
/// the published transform `A^view·T` (with `K = 0`) and the estimate is
/// reported in Alice's coordinates.
fn genie_mi(m: usize, snr: f64, pi: &polar_ot::IndexPermutation, view: u8, seed: u64) -> Vec<f64> {
    let n = 1 << m;
    let params = ChannelParams::linear(snr, 0).unwrap();
    let mut dec = ScDecoder::new(m, Combine::Exact);
    let mut acc = vec![0.0; n];
    for t in 0..TRIALS {
        let mut rng = SplitMix64::substream(seed, t);
        let u = rng.bits(n);
        // Codeword of the view in aligned coordinates: (u·A^view)·T.
        let u_prime = if view == 0 {
            u.clone()
        } else {
            apply_index_perm_inv(&u, pi).unwrap()
        };
        let mut x = u_prime.clone();
        polar_ot::polar::polar_butterfly(&mut x);
        let y = add_noise(&modulate(&x), &params, &mut rng);
        let r = dec
            .decode(&llr_map(&y, &params), &FrozenSpec::all_frozen(&u_prime))
            .unwrap();
        for j in 0..n {
            let s = 1.0 - 2.0 * u_prime[j] as f64;
            acc[j] += 1.0 - (-s * r.decision_llr[j]).exp().ln_1p() / std::f64::consts::LN_2;
        }
    }
    let per_j: Vec<f64> = acc.iter().map(|a| a / TRIALS as f64).collect();
    // u_i sits at aligned index π⁻¹(i) in view 1.
    let inv = pi.inverse();
    (0..n)
        .map(|i| per_j[if view == 0 { i } else { inv.apply(i) }])
        .collect()
}

#[test]
fn genie_mi_matches_ga_at_n8() {
    let snr = snr_for_i0(0.5).unwrap();
    let ga = MiProfile::ga(3, snr).unwrap();
    let id = polar_ot::IndexPermutation::identity(8);
    let mc = genie_mi(3, snr, &id, 0, 1);
    for (i, (a, b)) in mc.iter().zip(ga.mi()).enumerate() {
        assert!((a - b).abs() < 0.03, "I_{} MC {a:.4} GA {b:.4}", i + 1);
    }
}

#[test]
fn second_view_sees_permuted_channels() {
    let m = 4;
    let snr = snr_for_i0(0.5).unwrap();
    let ga = MiProfile::ga(m, snr).unwrap();
    let sigma = BitPermutation::new(vec![0, 1, 3, 2]).unwrap();
    let split = HalfSplit::from_profile(&ga);
    let sel = inner_topk(&sigma, &ga, &split, 1, Pairing::Swap).unwrap();
    let pi = sel.pi.clone();
    let mc = genie_mi(m, snr, &pi, 1, 2);
    let inv = pi.inverse();
    for (i, &got) in mc.iter().enumerate() {
        let want = ga.mi()[inv.apply(i)];
        assert!(
            (got - want).abs() < 0.03,
            "view 1, u_{}: MC {got:.4} vs I_π⁻¹ {want:.4}",
            i + 1
        );
    }
    // The decodable set the protocol announces for view 1 is the one the
    // simulated decoder actually sees as reliable.
    let union = sel.ot_indices();
    let d1 = view_decodable(&union, &pi, &split, 1);
    assert_eq!(d1, sel.bad_sel);
    for &i in &d1 {
        for &j in &union {
            if !d1.contains(&j) {
                assert!(mc[i] > mc[j]);
            }
        }
    }
    let cfg = polar_ot::SessionConfig {
        m,
        snr,
        selection: sel.to_file(),
        split: polar_ot::SplitRule::Profile,
        pairs: 1,
        ell: 1,
    };
    assert_eq!(SessionPlan::new(&cfg).unwrap().decodable[1], d1);
}
