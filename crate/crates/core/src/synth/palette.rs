//! Key colours of synthetic scenes and the calyx rule that recognises them.
//!
//! Every non-calyx colour keeps a high green channel, so after a glare
//! blue/green swap none of them reads as a dark-blue, red-leaning calyx.

pub const CALYX: [u8; 3] = [235, 25, 25];
pub const BRANCH: [u8; 3] = [120, 150, 90];
pub const WIRE: [u8; 3] = [205, 205, 225];
pub const CANOPY: [u8; 3] = [70, 175, 120];
pub const LEAF: [u8; 3] = [55, 160, 75];
pub const FRUIT: [u8; 3] = [150, 140, 95];
/// Posts and beams.
pub const TIMBER: [u8; 3] = [165, 160, 150];

/// Centre of the calyx chroma rule: red well above the mean, blue well below.
pub const CALYX_RULE_CENTER: [u8; 3] = [200, 127, 3];
/// Green is left free; it is the channel glare and its correction disturb.
pub const CALYX_RULE_TOLERANCE: [u8; 3] = [60, 255, 66];
