//! Codec and manifest validation tests.

mod common;

use proptest::prelude::*;
use tempfile::tempdir;

use spikesim::formats::model::load_model;
use spikesim::formats::{snnt, spkt};
use spikesim_core::bits::BitPlane;
use spikesim_core::memory::SpikeTrain;
use spikesim_core::tensor::Tensor;

proptest! {
    #[test]
    fn snnt_roundtrip_is_identity(
        dims in proptest::collection::vec(1usize..5, 1..4),
        seed in any::<u32>(),
    ) {
        // f32-representable payload survives the file format bit-exactly.
        let len: usize = dims.iter().product();
        let data: Vec<f64> = (0..len)
            .map(|i| f64::from((seed.wrapping_add(i as u32) % 1000) as f32 / 8.0 - 60.0))
            .collect();
        let t = Tensor::from_vec(&dims, data).unwrap();
        let back = snnt::decode_tensor(&snnt::encode_tensor(&t)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn spkt_roundtrip_is_identity(
        t_len in 1usize..4,
        c_len in 1usize..4,
        h in 1usize..6,
        w in 1usize..12,
        fill in proptest::collection::vec(any::<bool>(), 1..200),
    ) {
        let mut train = SpikeTrain::new(t_len, c_len, h, w);
        let mut it = fill.iter().cycle();
        for c in 0..c_len {
            for t in 0..t_len {
                let mut plane = BitPlane::new(h, w);
                for r in 0..h {
                    for col in 0..w {
                        if *it.next().unwrap() {
                            plane.set(r, col, true);
                        }
                    }
                }
                train.set_plane(c, t, plane).unwrap();
            }
        }
        let back = spkt::decode_spike_train(&spkt::encode_spike_train(&train)).unwrap();
        prop_assert_eq!(back, train);
    }
}

#[test]
fn model_loads_and_validates() {
    let dir = tempdir().unwrap();
    let files = common::write_toy_model(dir.path(), 7);
    let loaded = load_model(&files.model).unwrap();
    assert_eq!(loaded.net.weighted_count(), 3);
    assert_eq!(loaded.net.timesteps(), 2);
    assert_eq!(loaded.net.population() * loaded.net.classes(), 6);
}

#[test]
fn model_rejects_wrong_blob_shape() {
    let dir = tempdir().unwrap();
    let files = common::write_toy_model(dir.path(), 7);
    // Overwrite one weight blob with a wrong shape.
    snnt::write_tensor(&dir.path().join("w1.snnt"), &Tensor::zeros(&[4, 4, 3, 2])).unwrap();
    let err = load_model(&files.model).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("layer 1 weights"), "{msg}");
    assert!(msg.contains("[4, 4, 3, 2]"), "{msg}");
}

#[test]
fn model_rejects_layer_count_mismatch() {
    let dir = tempdir().unwrap();
    let files = common::write_toy_model(dir.path(), 7);
    let mut raw: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&files.model).unwrap()).unwrap();
    raw["layers"].as_array_mut().unwrap().pop();
    std::fs::write(&files.model, raw.to_string()).unwrap();
    let msg = load_model(&files.model).unwrap_err().to_string();
    assert!(msg.contains("3 weighted layers"), "{msg}");
    assert!(msg.contains("lists 2"), "{msg}");
}

#[test]
fn model_rejects_non_integer_quantized_blob() {
    let dir = tempdir().unwrap();
    let files = common::write_toy_model(dir.path(), 7);
    let mut raw: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&files.model).unwrap()).unwrap();
    raw["layers"][0]["quant"] =
        serde_json::json!({ "bit_width": 4, "scale_factor": 0.5, "zero_point": 0 });
    std::fs::write(&files.model, raw.to_string()).unwrap();
    let msg = load_model(&files.model).unwrap_err().to_string();
    assert!(msg.contains("not an integer"), "{msg}");
}

#[test]
fn model_honors_declared_bit_width() {
    let dir = tempdir().unwrap();
    let files = common::write_toy_model(dir.path(), 7);
    // Integer weights, but outside the int4 range.
    let mut w = Tensor::zeros(&[4, 3, 3, 3]);
    w.data_mut()[0] = 9.0;
    snnt::write_tensor(&dir.path().join("w0.snnt"), &w).unwrap();
    snnt::write_tensor(&dir.path().join("b0.snnt"), &Tensor::zeros(&[4])).unwrap();
    let mut raw: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&files.model).unwrap()).unwrap();
    raw["layers"][0]["quant"] =
        serde_json::json!({ "bit_width": 4, "scale_factor": 0.5, "zero_point": 0 });
    std::fs::write(&files.model, raw.to_string()).unwrap();
    let msg = load_model(&files.model).unwrap_err().to_string();
    assert!(msg.contains("outside signed 4-bit range"), "{msg}");
}

#[test]
fn quantized_model_loads_and_runs() {
    let dir = tempdir().unwrap();
    let files = common::write_toy_model(dir.path(), 21);
    // Re-encode the first conv as int4: quantize the stored weights and
    // rewrite the blob with the integer values.
    let w = snnt::load_tensor(&dir.path().join("w0.snnt")).unwrap();
    let q = spikesim_core::quant::quantize_tensor(&w, 4).unwrap();
    let ints =
        Tensor::from_vec(q.dims(), q.values().iter().map(|&v| f64::from(v)).collect()).unwrap();
    snnt::write_tensor(&dir.path().join("w0.snnt"), &ints).unwrap();
    let b = snnt::load_tensor(&dir.path().join("b0.snnt")).unwrap();
    let qb = spikesim_core::quant::quantize_tensor(&b, 4).unwrap();
    let bints = Tensor::from_vec(
        qb.dims(),
        qb.values().iter().map(|&v| f64::from(v)).collect(),
    )
    .unwrap();
    snnt::write_tensor(&dir.path().join("b0.snnt"), &bints).unwrap();

    let mut raw: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&files.model).unwrap()).unwrap();
    raw["layers"][0]["quant"] = serde_json::json!({
        "bit_width": 4,
        "scale_factor": q.params().scale_factor(),
        "zero_point": 0,
    });
    std::fs::write(&files.model, raw.to_string()).unwrap();

    let loaded = load_model(&files.model);
    assert!(loaded.is_ok(), "{:?}", loaded.err().map(|e| e.to_string()));
}
