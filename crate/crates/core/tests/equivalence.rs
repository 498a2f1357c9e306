//! Packed messages against a soft-passing reference, and BEE without the
//! erasure branch against iBDD-CR.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prodec::channel::{transmit, Constellation};
use prodec::codes::{CodeId, Structure};
use prodec::decoder::{DecodeSchedule, DecoderKind};
use prodec::lut::CombiningLut;
use prodec::pc::{PcDecoder, ProductCode};
use prodec::scc::{SccDecoder, StaircaseCode};
use prodec::BchCode;

fn varied_lut(iterations: usize) -> CombiningLut {
    let w = (0..2 * iterations).map(|i| 1.5 + 0.4 * i as f64).collect();
    CombiningLut::new("any", 0.0, 1, w).unwrap()
}

#[test]
fn packed_bee_matches_soft_reference() {
    let code = BchCode::new(6, 2, 0, true).unwrap();
    let pc = ProductCode::new(code.clone());
    let c = Constellation::new(1).unwrap();
    let sigma = c.sigma_for_ebn0(3.5, pc.rate()).unwrap();
    let schedule = DecodeSchedule::default();
    let lut = varied_lut(schedule.soft_iterations);
    let weights = lut.weights.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let (block, llr) = common::noisy_array(&pc, &c, sigma, &mut rng);
        let r = Some(block.bits());
        let packed = PcDecoder::new(&code, DecoderKind::Bee, schedule, Some(&lut))
            .unwrap()
            .with_packed_messages(true)
            .decode(&llr, r)
            .unwrap();
        let plain = PcDecoder::new(&code, DecoderKind::Bee, schedule, Some(&lut))
            .unwrap()
            .decode(&llr, r)
            .unwrap();
        let soft = common::reference_bee_pc(&code, &llr, &weights, 10, 2, true, block.bits());
        assert_eq!(packed.decisions, soft.decisions);
        assert_eq!(packed.trajectory, soft.trajectory);
        assert_eq!(plain.decisions, packed.decisions);
        assert_eq!(plain.stats, packed.stats);
        let n = code.n() as u64;
        assert_eq!(packed.soft_message_bits, 20 * n * (n + 1));
    }
}

#[test]
fn bee_without_erasures_is_cr_on_products() {
    let code = CodeId::C2.params().build().unwrap();
    let pc = ProductCode::new(code.clone());
    let c = Constellation::new(1).unwrap();
    let sigma = c.sigma_for_ebn0(4.0, pc.rate()).unwrap();
    let schedule = DecodeSchedule {
        erasure_branch: false,
        ..DecodeSchedule::default()
    };
    let lut = varied_lut(schedule.soft_iterations);
    let bee = PcDecoder::new(&code, DecoderKind::Bee, schedule, Some(&lut)).unwrap();
    let cr = PcDecoder::new(&code, DecoderKind::IbddCr, schedule, Some(&lut)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let (block, llr) = common::noisy_array(&pc, &c, sigma, &mut rng);
        let a = bee.decode(&llr, Some(block.bits())).unwrap();
        let b = cr.decode(&llr, Some(block.bits())).unwrap();
        assert_eq!(a.decisions, b.decisions);
        assert_eq!(a.trajectory, b.trajectory);
    }
}

#[test]
fn bee_without_erasures_is_cr_on_staircases() {
    let code = CodeId::C2.params_for(Structure::Scc).build().unwrap();
    let sc = StaircaseCode::new(code.clone()).unwrap();
    let c = Constellation::new(1).unwrap();
    let sigma = c.sigma_for_ebn0(4.1, sc.rate()).unwrap();
    let schedule = DecodeSchedule {
        erasure_branch: false,
        ..DecodeSchedule::default()
    };
    let window = 5;
    let w = (0..schedule.soft_iterations * (window - 1)).map(|i| 1.0 + 0.1 * i as f64).collect();
    let lut = CombiningLut::window_pairs("any", 0.0, 1, window - 1, w).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let blocks = 12;
    let info = common::random_bits(&mut rng, blocks * sc.block_info_len());
    let tx = sc.encode_stream(&info).unwrap();
    let llrs: Vec<Vec<f64>> = tx.iter().map(|b| transmit(b.bits(), &c, sigma, &mut rng).unwrap()).collect();
    let run = |kind| {
        let dec = SccDecoder::new(&code, kind, schedule, Some(&lut), window).unwrap();
        let mut win = dec.start();
        let mut out: Vec<_> = llrs.iter().filter_map(|l| win.push(l.clone(), None).unwrap()).collect();
        out.extend(win.finish().unwrap());
        out
    };
    let a = run(DecoderKind::Bee);
    let b = run(DecoderKind::IbddCr);
    assert_eq!(a.len(), blocks);
    assert_eq!(a, b);
}
