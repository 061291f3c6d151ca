use super::{Instance, InstanceError, InstanceOptions};
use crate::catalog::Catalog;
use crate::netmodel::Topology;
use crate::requests::RequestSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BundleOptions {
    #[serde(default)]
    pub capacity_cap: Option<u32>,
    #[serde(default = "default_sharing")]
    pub sharing: bool,
    #[serde(default)]
    pub big_m: Option<f64>,
}

fn default_sharing() -> bool {
    true
}

impl From<InstanceOptions> for BundleOptions {
    fn from(o: InstanceOptions) -> Self {
        Self {
            capacity_cap: o.capacity_cap,
            sharing: o.sharing,
            big_m: o.big_m,
        }
    }
}

impl From<BundleOptions> for InstanceOptions {
    fn from(o: BundleOptions) -> Self {
        Self {
            capacity_cap: o.capacity_cap,
            sharing: o.sharing,
            big_m: o.big_m,
        }
    }
}

/// Single JSON document holding everything needed to rebuild an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceBundle {
    pub topology: Topology,
    pub catalog: Catalog,
    pub requests: RequestSet,
    pub options: BundleOptions,
}

impl InstanceBundle {
    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            topology: inst.topology().clone(),
            catalog: inst.catalog().clone(),
            requests: inst.requests().clone(),
            options: inst.options().into(),
        }
    }

    pub fn into_instance(self) -> Result<Instance, InstanceError> {
        Instance::new(self.topology, self.catalog, self.requests, self.options.into())
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn t1_round_trips() {
        let inst = fixtures::t1(false);
        let json = InstanceBundle::from_instance(&inst).to_json();
        let back = InstanceBundle::from_json(&json).unwrap().into_instance().unwrap();
        assert_eq!(back.topology().nodes(), inst.topology().nodes());
        assert_eq!(back.catalog().models(), inst.catalog().models());
        assert_eq!(back.requests(), inst.requests());
        assert_eq!(back.options(), inst.options());
        assert_eq!(InstanceBundle::from_instance(&back).to_json(), json);
    }
}
