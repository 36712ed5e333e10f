//! The option tree: device × compiler family × setting.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CompileError;
use crate::devices::DeviceModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
}

/// Family A takes an optimization level, family B a placement strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    #[serde(rename = "O0")]
    O0,
    #[serde(rename = "O1")]
    O1,
    #[serde(rename = "O2")]
    O2,
    #[serde(rename = "O3")]
    O3,
    Line,
    Graph,
}

impl Setting {
    pub const FAMILY_A: [Setting; 4] = [Setting::O0, Setting::O1, Setting::O2, Setting::O3];
    pub const FAMILY_B: [Setting; 2] = [Setting::Line, Setting::Graph];

    pub fn family(self) -> Family {
        match self {
            Setting::Line | Setting::Graph => Family::B,
            _ => Family::A,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Setting::O0 => "O0",
            Setting::O1 => "O1",
            Setting::O2 => "O2",
            Setting::O3 => "O3",
            Setting::Line => "line",
            Setting::Graph => "graph",
        }
    }
}

/// Optimization level of the final cleanup stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptLevel {
    O0,
    O1,
    O2,
    O3,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CompilationOption {
    pub device_id: String,
    pub family: Family,
    pub setting: Setting,
}

impl CompilationOption {
    pub fn new(device_id: impl Into<String>, setting: Setting) -> Self {
        CompilationOption {
            device_id: device_id.into(),
            family: setting.family(),
            setting,
        }
    }

    /// `device/family/setting`, e.g. `dev8/A/O3`.
    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn opt_level(&self) -> OptLevel {
        match self.setting {
            Setting::O0 => OptLevel::O0,
            Setting::O2 => OptLevel::O2,
            Setting::O3 => OptLevel::O3,
            Setting::O1 | Setting::Line | Setting::Graph => OptLevel::O1,
        }
    }
}

impl fmt::Display for CompilationOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.family {
            Family::A => "A",
            Family::B => "B",
        };
        write!(f, "{}/{}/{}", self.device_id, family, self.setting.name())
    }
}

impl FromStr for CompilationOption {
    type Err = CompileError;

    fn from_str(s: &str) -> Result<Self, CompileError> {
        let bad = || CompileError::BadOption(String::from(s));
        let mut parts = s.rsplitn(3, '/');
        let (setting, family, device) = match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(f), Some(d)) if !d.is_empty() => (s, f, d),
            _ => return Err(bad()),
        };
        let setting = match setting {
            "O0" => Setting::O0,
            "O1" => Setting::O1,
            "O2" => Setting::O2,
            "O3" => Setting::O3,
            "line" => Setting::Line,
            "graph" => Setting::Graph,
            _ => return Err(bad()),
        };
        let family = match family {
            "A" => Family::A,
            "B" => Family::B,
            _ => return Err(bad()),
        };
        if setting.family() != family {
            return Err(bad());
        }
        Ok(CompilationOption::new(device, setting))
    }
}

impl TryFrom<String> for CompilationOption {
    type Error = CompileError;

    fn try_from(s: String) -> Result<Self, CompileError> {
        s.parse()
    }
}

impl From<CompilationOption> for String {
    fn from(o: CompilationOption) -> String {
        o.id()
    }
}

/// Six options per device: A/O0..O3 then B/line, B/graph, devices in order.
pub fn enumerate_options(devices: &[DeviceModel]) -> Result<Vec<CompilationOption>, CompileError> {
    if devices.is_empty() {
        return Err(CompileError::NoDevices);
    }
    Ok(devices
        .iter()
        .flat_map(|d| {
            Setting::FAMILY_A
                .iter()
                .chain(&Setting::FAMILY_B)
                .map(move |&s| CompilationOption::new(d.id.clone(), s))
        })
        .collect())
}

/// Looks up the device an option targets.
pub fn device_for<'a>(
    opt: &CompilationOption,
    devices: &'a [DeviceModel],
) -> Result<&'a DeviceModel, CompileError> {
    devices
        .iter()
        .find(|d| d.id == opt.device_id)
        .ok_or_else(|| CompileError::UnknownDevice(opt.device_id.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::builtin_devices;

    #[test]
    fn thirty_options_for_the_fleet() {
        let fleet = builtin_devices();
        let opts = enumerate_options(&fleet).unwrap();
        assert_eq!(opts.len(), 30);
        assert_eq!(opts[0].id(), "dev8/A/O0");
        assert_eq!(opts[4].id(), "dev8/B/line");
        assert_eq!(opts[5].id(), "dev8/B/graph");
        assert_eq!(opts[6].id(), "dev11/A/O0");
        assert_eq!(enumerate_options(&fleet[..1]).unwrap().len(), 6);
        assert_eq!(enumerate_options(&[]), Err(CompileError::NoDevices));
    }

    #[test]
    fn id_round_trip() {
        for o in enumerate_options(&builtin_devices()).unwrap() {
            assert_eq!(o.id().parse::<CompilationOption>().unwrap(), o);
        }
        for bad in ["dev8/A/line", "dev8/C/O1", "dev8/O1", "/A/O1", "dev8/B/O4"] {
            assert!(bad.parse::<CompilationOption>().is_err(), "{bad}");
        }
    }
}
