//! Hash-grid radiance field LoD presets and their trainer configuration
//! documents.
//!
//! Each step down the chain halves the hash table (`log2_hashmap_size - 1`)
//! and narrows the networks. The emitted JSON uses the key names of the
//! common instant-ngp style configuration files, so an external trainer can
//! consume it directly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NerfConfigError {
    #[error("LoD {0} is outside 0..=3")]
    LodOutOfRange(u8),
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unexpected {field}: {value:?}")]
    Unsupported { field: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NerfPreset {
    pub lod: u8,
    pub hash_levels: u32,
    pub features_per_level: u32,
    pub log2_hashmap_size: u32,
    pub base_resolution: u32,
    pub density_neurons: u32,
    pub density_layers: u32,
    pub sh_degree: u32,
    pub rgb_neurons: u32,
    pub rgb_layers: u32,
}

const PRESETS: [NerfPreset; 4] = [
    row(0, 18, 128, 4, 64, 2),
    row(1, 17, 64, 3, 32, 2),
    row(2, 16, 32, 2, 16, 2),
    row(3, 15, 16, 1, 16, 1),
];

const fn row(lod: u8, log2t: u32, density: u32, sh: u32, rgb: u32, rgb_layers: u32) -> NerfPreset {
    NerfPreset {
        lod,
        hash_levels: 12,
        features_per_level: 2,
        log2_hashmap_size: log2t,
        base_resolution: 16,
        density_neurons: density,
        density_layers: 1,
        sh_degree: sh,
        rgb_neurons: rgb,
        rgb_layers,
    }
}

pub fn preset(lod: u8) -> Result<NerfPreset, NerfConfigError> {
    PRESETS
        .get(lod as usize)
        .copied()
        .ok_or(NerfConfigError::LodOutOfRange(lod))
}

pub fn presets() -> [NerfPreset; 4] {
    PRESETS
}

/// Feature slots across all hash levels: `L · 2^log2T · F`.
pub fn hash_capacity(p: &NerfPreset) -> u64 {
    p.hash_levels as u64 * (1u64 << p.log2_hashmap_size) * p.features_per_level as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerfConfig {
    pub lod: u8,
    pub encoding: EncodingConfig,
    pub network: NetworkConfig,
    pub dir_encoding: DirEncodingConfig,
    pub rgb_network: NetworkConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub otype: String,
    pub n_levels: u32,
    pub n_features_per_level: u32,
    pub log2_hashmap_size: u32,
    pub base_resolution: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub otype: String,
    pub activation: String,
    pub output_activation: String,
    pub n_neurons: u32,
    pub n_hidden_layers: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirEncodingConfig {
    pub otype: String,
    pub nested: Vec<DirComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirComponent {
    pub otype: String,
    pub n_dims_to_encode: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
}

fn mlp(neurons: u32, layers: u32) -> NetworkConfig {
    NetworkConfig {
        otype: "FullyFusedMLP".into(),
        activation: "ReLU".into(),
        output_activation: "None".into(),
        n_neurons: neurons,
        n_hidden_layers: layers,
    }
}

pub fn to_config(p: &NerfPreset) -> NerfConfig {
    NerfConfig {
        lod: p.lod,
        encoding: EncodingConfig {
            otype: "HashGrid".into(),
            n_levels: p.hash_levels,
            n_features_per_level: p.features_per_level,
            log2_hashmap_size: p.log2_hashmap_size,
            base_resolution: p.base_resolution,
        },
        network: mlp(p.density_neurons, p.density_layers),
        dir_encoding: DirEncodingConfig {
            otype: "Composite".into(),
            nested: vec![
                DirComponent {
                    otype: "SphericalHarmonics".into(),
                    n_dims_to_encode: 3,
                    degree: Some(p.sh_degree),
                },
                DirComponent {
                    otype: "Identity".into(),
                    n_dims_to_encode: 3,
                    degree: None,
                },
            ],
        },
        rgb_network: mlp(p.rgb_neurons, p.rgb_layers),
    }
}

/// Pretty-printed JSON with a trailing newline; key order is fixed.
pub fn emit_config(p: &NerfPreset) -> String {
    let mut s = serde_json::to_string_pretty(&to_config(p)).expect("config serializes");
    s.push('\n');
    s
}

pub fn parse_config(text: &str) -> Result<NerfPreset, NerfConfigError> {
    let c: NerfConfig = serde_json::from_str(text)?;
    let sh = c
        .dir_encoding
        .nested
        .iter()
        .find(|d| d.otype == "SphericalHarmonics")
        .and_then(|d| d.degree)
        .ok_or(NerfConfigError::Unsupported {
            field: "dir_encoding",
            value: "no SphericalHarmonics component".into(),
        })?;
    if c.encoding.otype != "HashGrid" {
        return Err(NerfConfigError::Unsupported {
            field: "encoding.otype",
            value: c.encoding.otype,
        });
    }
    Ok(NerfPreset {
        lod: c.lod,
        hash_levels: c.encoding.n_levels,
        features_per_level: c.encoding.n_features_per_level,
        log2_hashmap_size: c.encoding.log2_hashmap_size,
        base_resolution: c.encoding.base_resolution,
        density_neurons: c.network.n_neurons,
        density_layers: c.network.n_hidden_layers,
        sh_degree: sh,
        rgb_neurons: c.rgb_network.n_neurons,
        rgb_layers: c.rgb_network.n_hidden_layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let p0 = preset(0).unwrap();
        assert_eq!(
            (p0.hash_levels, p0.features_per_level, p0.log2_hashmap_size, p0.base_resolution),
            (12, 2, 18, 16)
        );
        assert_eq!((p0.density_neurons, p0.density_layers, p0.sh_degree, p0.rgb_neurons, p0.rgb_layers), (128, 1, 4, 64, 2));
        let p2 = preset(2).unwrap();
        assert_eq!((p2.log2_hashmap_size, p2.density_neurons, p2.sh_degree, p2.rgb_neurons, p2.rgb_layers), (16, 32, 2, 16, 2));
        let p3 = preset(3).unwrap();
        assert_eq!((p3.log2_hashmap_size, p3.density_neurons, p3.sh_degree, p3.rgb_neurons, p3.rgb_layers), (15, 16, 1, 16, 1));
        assert!(matches!(preset(4), Err(NerfConfigError::LodOutOfRange(4))));
    }

    #[test]
    fn capacity_halves() {
        assert_eq!(hash_capacity(&preset(0).unwrap()), 6_291_456);
        assert_eq!(hash_capacity(&preset(3).unwrap()), 786_432);
        for w in presets().windows(2) {
            assert_eq!(hash_capacity(&w[0]), 2 * hash_capacity(&w[1]));
            assert!(w[1].density_neurons <= w[0].density_neurons);
            assert!(w[1].rgb_neurons <= w[0].rgb_neurons);
            assert!(w[1].sh_degree <= w[0].sh_degree);
            assert_eq!((w[1].hash_levels, w[1].features_per_level), (12, 2));
        }
    }

    #[test]
    fn emit_round_trips_deterministically() {
        for p in presets() {
            let text = emit_config(&p);
            assert_eq!(parse_config(&text).unwrap(), p);
            assert_eq!(text, emit_config(&p));
        }
        let v: serde_json::Value = serde_json::from_str(&emit_config(&preset(1).unwrap())).unwrap();
        assert_eq!(v["encoding"]["log2_hashmap_size"], 17);
        assert_eq!(v["dir_encoding"]["nested"][1]["otype"], "Identity");
    }

    #[test]
    fn key_order_is_fixed() {
        let text = emit_config(&preset(0).unwrap());
        let pos = |k: &str| text.find(k).unwrap();
        assert!(pos("\"encoding\"") < pos("\"network\""));
        assert!(pos("\"network\"") < pos("\"dir_encoding\""));
        assert!(pos("\"dir_encoding\"") < pos("\"rgb_network\""));
    }
}
