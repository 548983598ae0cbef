//! Topology string parsing.
//!
//! The grammar is dash-separated tokens: `XCY` is a convolution with `X`
//! filters of size `Y x Y`, `MPZ` is `Z x Z` max-pooling, a bare integer
//! is a fully connected layer with that many neurons, and a trailing `P`
//! is the population-coded output layer (`population * classes` neurons,
//! both taken from the model file). Example:
//!
//! `64C3-112C3-MP2-192C3-216C3-MP2-480C3-504C3-560C3-MP2-1064-P`

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("empty topology string")]
    Empty,
    #[error("unknown token `{token}` (token {index})")]
    UnknownToken { token: String, index: usize },
    #[error("token `{token}` (token {index}): {reason}")]
    BadToken {
        token: String,
        index: usize,
        reason: &'static str,
    },
    #[error("`P` is only valid as the final token")]
    MisplacedPopulation,
    #[error("layer {index}: {reason}")]
    Flow { index: usize, reason: String },
}

/// One parsed token of the topology grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopoToken {
    Conv {
        filters: usize,
        kernel: usize,
    },
    MaxPool {
        size: usize,
    },
    Fc {
        neurons: usize,
    },
    /// Output layer sized `population * classes`.
    Population,
}

impl fmt::Display for TopoToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopoToken::Conv { filters, kernel } => write!(f, "{filters}C{kernel}"),
            TopoToken::MaxPool { size } => write!(f, "MP{size}"),
            TopoToken::Fc { neurons } => write!(f, "{neurons}"),
            TopoToken::Population => write!(f, "P"),
        }
    }
}

/// Split a topology string into tokens, rejecting anything outside the
/// grammar with the offending token named.
pub fn parse_topology(s: &str) -> Result<Vec<TopoToken>, TopologyError> {
    if s.trim().is_empty() {
        return Err(TopologyError::Empty);
    }
    let raw: Vec<&str> = s.trim().split('-').collect();
    let mut tokens = Vec::with_capacity(raw.len());
    for (index, tok) in raw.iter().enumerate() {
        let parsed = parse_token(tok).ok_or_else(|| TopologyError::UnknownToken {
            token: (*tok).to_string(),
            index,
        })?;
        match &parsed {
            TopoToken::Conv { filters, kernel } if *filters == 0 || *kernel == 0 => {
                return Err(TopologyError::BadToken {
                    token: (*tok).to_string(),
                    index,
                    reason: "filter count and kernel size must be positive",
                });
            }
            TopoToken::MaxPool { size } if *size == 0 => {
                return Err(TopologyError::BadToken {
                    token: (*tok).to_string(),
                    index,
                    reason: "pool size must be positive",
                });
            }
            TopoToken::Fc { neurons } if *neurons == 0 => {
                return Err(TopologyError::BadToken {
                    token: (*tok).to_string(),
                    index,
                    reason: "neuron count must be positive",
                });
            }
            TopoToken::Population if index + 1 != raw.len() => {
                return Err(TopologyError::MisplacedPopulation);
            }
            _ => {}
        }
        tokens.push(parsed);
    }
    Ok(tokens)
}

fn parse_token(tok: &str) -> Option<TopoToken> {
    if tok == "P" {
        return Some(TopoToken::Population);
    }
    if let Some(rest) = tok.strip_prefix("MP") {
        return rest.parse().ok().map(|size| TopoToken::MaxPool { size });
    }
    if let Some((x, y)) = tok.split_once('C') {
        let filters = x.parse().ok()?;
        let kernel = y.parse().ok()?;
        return Some(TopoToken::Conv { filters, kernel });
    }
    tok.parse().ok().map(|neurons| TopoToken::Fc { neurons })
}

/// One layer with its dimensions resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlannedLayer {
    Conv {
        in_channels: usize,
        out_channels: usize,
    },
    MaxPool {
        size: usize,
    },
    Fc {
        in_neurons: usize,
        out_neurons: usize,
    },
}

impl PlannedLayer {
    pub fn is_weighted(&self) -> bool {
        !matches!(self, PlannedLayer::MaxPool { .. })
    }

    /// Expected weight-blob dims for a weighted layer.
    pub fn weight_dims(&self) -> Option<Vec<usize>> {
        match self {
            PlannedLayer::Conv {
                in_channels,
                out_channels,
            } => Some(vec![*out_channels, *in_channels, 3, 3]),
            PlannedLayer::Fc {
                in_neurons,
                out_neurons,
            } => Some(vec![*out_neurons, *in_neurons]),
            PlannedLayer::MaxPool { .. } => None,
        }
    }

    pub fn bias_len(&self) -> Option<usize> {
        match self {
            PlannedLayer::Conv { out_channels, .. } => Some(*out_channels),
            PlannedLayer::Fc { out_neurons, .. } => Some(*out_neurons),
            PlannedLayer::MaxPool { .. } => None,
        }
    }
}

/// Resolve every token's dimensions against a declared input shape.
pub fn plan_layers(
    tokens: &[TopoToken],
    input_shape: (usize, usize, usize),
    population: usize,
    classes: usize,
) -> Result<Vec<PlannedLayer>, TopologyError> {
    let (mut c, mut h, mut w) = input_shape;
    let mut plans = Vec::with_capacity(tokens.len());
    let mut flattened = false;
    for (index, token) in tokens.iter().enumerate() {
        let flow = |reason: String| TopologyError::Flow { index, reason };
        match token {
            TopoToken::Conv { filters, kernel } => {
                if *kernel != 3 {
                    return Err(flow(format!(
                        "only 3x3 convolutions are supported, got {kernel}x{kernel}"
                    )));
                }
                if flattened {
                    return Err(flow("convolution after a fully connected layer".into()));
                }
                if h < 3 || w < 3 {
                    return Err(flow(format!("activation {h}x{w} smaller than the filter")));
                }
                plans.push(PlannedLayer::Conv {
                    in_channels: c,
                    out_channels: *filters,
                });
                c = *filters;
            }
            TopoToken::MaxPool { size } => {
                if flattened {
                    return Err(flow("pool after a fully connected layer".into()));
                }
                if h % size != 0 || w % size != 0 {
                    return Err(flow(format!("{h}x{w} activation not divisible by {size}")));
                }
                plans.push(PlannedLayer::MaxPool { size: *size });
                h /= size;
                w /= size;
            }
            TopoToken::Fc { neurons } => {
                plans.push(PlannedLayer::Fc {
                    in_neurons: c * h * w,
                    out_neurons: *neurons,
                });
                c = *neurons;
                h = 1;
                w = 1;
                flattened = true;
            }
            TopoToken::Population => {
                plans.push(PlannedLayer::Fc {
                    in_neurons: c * h * w,
                    out_neurons: population * classes,
                });
                c = population * classes;
                h = 1;
                w = 1;
                flattened = true;
            }
        }
    }
    match plans.last() {
        Some(PlannedLayer::Fc { out_neurons, .. }) if *out_neurons == population * classes => {}
        _ => {
            return Err(TopologyError::Flow {
                index: tokens.len().saturating_sub(1),
                reason: format!(
                    "final layer must hold population * classes = {} neurons",
                    population * classes
                ),
            })
        }
    }
    Ok(plans)
}
