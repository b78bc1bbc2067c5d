//! JSON instance files.

use num_bigint::BigUint;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use super::generators::{
    gen_nosketch_domain, gen_random_k_minded, gen_random_single_crossing, gen_sat_twoplayer_domains,
    gen_separation_domains,
};
use super::{AuctionInstance, CnfFormula, Domain, Role, Valuation, Witness};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: u64,
    pub players: Vec<PlayerSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    pub domain: DomainSpec,
    pub report: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuations: Option<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomScParams {
    pub seed: u64,
    pub size: u64,
    pub m: u64,
    pub max_marginal: u64,
    /// Restricts increases to this many random quantities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationParams {
    pub bits: u32,
    pub role: Role,
}

/// Shared by `sat2p` and `payment_hardness`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarsParams {
    pub vars: u32,
    pub role: Role,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NosketchParams {
    pub m: u64,
}

fn params<T: DeserializeOwned>(name: &str, value: &Option<Value>) -> Result<T> {
    let value = value
        .clone()
        .ok_or_else(|| Error::Parse(format!("generator {name:?} needs params")))?;
    serde_json::from_value(value).map_err(|e| Error::Parse(format!("params of {name:?}: {e}")))
}

fn parse_value(n: &Number) -> Result<BigUint> {
    let text = n.to_string();
    text.parse::<BigUint>()
        .map_err(|_| Error::Parse(format!("value {text} is not a non-negative integer")))
}

impl DomainSpec {
    pub fn explicit(domain: &Domain, cap: u64) -> Result<Self> {
        let valuations = domain
            .materialize(cap)?
            .iter()
            .map(|v| {
                v.values()
                    .iter()
                    .map(|x| x.to_string().parse::<Number>().expect("integer literal"))
                    .collect()
            })
            .collect();
        Ok(DomainSpec {
            kind: "explicit".into(),
            valuations: Some(valuations),
            name: None,
            params: None,
        })
    }

    pub fn generator<P: Serialize>(name: &str, params: &P) -> Self {
        DomainSpec {
            kind: "generator".into(),
            valuations: None,
            name: Some(name.into()),
            params: Some(serde_json::to_value(params).expect("params serialize")),
        }
    }

    pub fn build(&self) -> Result<Domain> {
        match self.kind.as_str() {
            "explicit" => {
                if self.name.is_some() || self.params.is_some() {
                    return Err(Error::Parse("explicit domain takes only valuations".into()));
                }
                let rows = self
                    .valuations
                    .as_ref()
                    .ok_or_else(|| Error::Parse("explicit domain needs valuations".into()))?;
                let vals = rows
                    .iter()
                    .map(|row| Valuation::new(row.iter().map(parse_value).collect::<Result<_>>()?))
                    .collect::<Result<Vec<_>>>()?;
                Domain::explicit(vals)
            }
            "generator" => {
                if self.valuations.is_some() {
                    return Err(Error::Parse("generator domain takes no valuations".into()));
                }
                let name = self
                    .name
                    .as_deref()
                    .ok_or_else(|| Error::Parse("generator domain needs a name".into()))?;
                self.build_generator(name)
            }
            other => Err(Error::Parse(format!("unknown domain kind {other:?}"))),
        }
    }

    fn build_generator(&self, name: &str) -> Result<Domain> {
        match name {
            "random_sc" => {
                let p: RandomScParams = params(name, &self.params)?;
                match p.steps {
                    Some(k) => Ok(gen_random_k_minded(p.seed, p.size, p.m, k, p.max_marginal)?.0),
                    None => gen_random_single_crossing(p.seed, p.size, p.m, p.max_marginal),
                }
            }
            "separation" => {
                let p: SeparationParams = params(name, &self.params)?;
                let (a, b) = gen_separation_domains(p.bits, Witness::Modular)?;
                Ok(if p.role == Role::Alice { a } else { b })
            }
            "sat2p" => {
                let p: VarsParams = params(name, &self.params)?;
                let (a, b) = gen_sat_twoplayer_domains(p.vars)?;
                Ok(if p.role == Role::Alice { a } else { b })
            }
            "payment_hardness" => {
                let p: VarsParams = params(name, &self.params)?;
                if p.vars == 0 || p.vars > 20 {
                    return Err(Error::Parameter(format!(
                        "number of variables must be in 1..=20, got {}",
                        p.vars
                    )));
                }
                let m = 1u64 << p.vars;
                match p.role {
                    Role::Alice => Domain::linear(m, m + 1),
                    Role::Bob => Domain::linear(m, CnfFormula::count(p.vars)?),
                }
            }
            "nosketch" => {
                let p: NosketchParams = params(name, &self.params)?;
                gen_nosketch_domain(p.m)
            }
            other => Err(Error::Parse(format!("unknown generator {other:?}"))),
        }
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Pretty JSON with each valuation on one line.
    pub fn to_json(&self) -> String {
        let mut text = format!("{{\n  \"m\": {},\n  \"players\": [", self.m);
        for (i, p) in self.players.iter().enumerate() {
            text.push_str(if i == 0 { "\n" } else { ",\n" });
            text.push_str("    {\n      \"domain\": {\n");
            text.push_str(&format!("        \"kind\": {}", compact(&p.domain.kind)));
            if let Some(rows) = &p.domain.valuations {
                text.push_str(",\n        \"valuations\": [");
                for (j, row) in rows.iter().enumerate() {
                    text.push_str(if j == 0 { "\n" } else { ",\n" });
                    text.push_str(&format!("          {}", compact(row)));
                }
                text.push_str("\n        ]");
            }
            if let Some(name) = &p.domain.name {
                text.push_str(&format!(",\n        \"name\": {}", compact(name)));
            }
            if let Some(params) = &p.domain.params {
                text.push_str(&format!(",\n        \"params\": {}", compact(params)));
            }
            text.push_str(&format!("\n      }},\n      \"report\": {}\n    }}", p.report));
        }
        text.push_str(if self.players.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
        text
    }

    pub fn to_instance(&self) -> Result<AuctionInstance> {
        let domains = self
            .players
            .iter()
            .map(|p| p.domain.build())
            .collect::<Result<Vec<_>>>()?;
        let reports = self.players.iter().map(|p| p.report).collect();
        AuctionInstance::new(self.m, domains, reports)
    }

    /// Writes every domain explicitly.
    pub fn from_instance(instance: &AuctionInstance, cap: u64) -> Result<Self> {
        let players = instance
            .domains()
            .iter()
            .zip(instance.reports())
            .map(|(d, &report)| {
                Ok(PlayerSpec {
                    domain: DomainSpec::explicit(d, cap)?,
                    report,
                })
            })
            .collect::<Result<_>>()?;
        Ok(InstanceFile {
            m: instance.m(),
            players,
        })
    }
}

fn compact<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("value serializes")
}
