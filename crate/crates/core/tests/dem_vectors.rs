//! Stream-variant vectors produced with an independent AES-CTR implementation.

use phecd_core::bits::BitString;
use phecd_core::dem::{self, DemKey, NONCE_LEN};
use serde_json::Value;

fn hex(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

#[test]
fn stream_vectors_match() {
    let raw = include_str!("data/dem_stream_vectors.json");
    let doc: Value = serde_json::from_str(raw).unwrap();
    let vectors = doc["vectors"].as_array().unwrap();
    assert!(vectors.len() >= 8);
    for v in vectors {
        let key = DemKey(v["key"].as_str().unwrap().parse().unwrap());
        let message: BitString = v["message"].as_str().unwrap().parse().unwrap();
        let nonce: [u8; NONCE_LEN] = hex(v["nonce"].as_str().unwrap()).try_into().unwrap();
        let framed = hex(v["framed"].as_str().unwrap());
        let ct = dem::encap_stream(&key, &message, nonce).unwrap();
        assert_eq!(ct.to_bytes(), framed, "key {}", key.bits());
        assert_eq!(dem::decap_bytes(&key, &framed, message.len()), Some(message));
    }
}
