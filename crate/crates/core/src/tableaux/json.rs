//! JSON method documents. Rational entries are written as `"p/q"` strings;
//! λ-dependent entries as 40-digit decimal strings. Reading accepts either form
//! as well as plain JSON numbers.

use serde::{Deserialize, Serialize};

use super::{increments, BaseTableau, GammaStack, MethodKind, MriGarkMethod};
use crate::error::{Error, Result};
use crate::field::Exact;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Text(String),
    Number(serde_json::Number),
}

impl Coefficient {
    fn parse(&self) -> Result<Exact> {
        let text = match self {
            Coefficient::Text(s) => s.clone(),
            Coefficient::Number(n) => n.to_string(),
        };
        Exact::parse(&text).ok_or_else(|| Error::InvalidMethod(format!("cannot parse coefficient `{text}`")))
    }
}

impl From<&Exact> for Coefficient {
    fn from(e: &Exact) -> Self {
        Coefficient::Text(e.to_string())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MethodDocument {
    pub name: String,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedded_order: Option<usize>,
    pub c: Vec<Coefficient>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Coefficient>>,
    pub b: Vec<Coefficient>,
    #[serde(default)]
    pub b_hat: Option<Vec<Coefficient>>,
    pub gamma: Vec<Vec<Vec<Coefficient>>>,
    #[serde(default)]
    pub gamma_hat: Option<Vec<Vec<Coefficient>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<MethodKind>,
}

fn vec_in(v: &[Coefficient]) -> Result<Vec<Exact>> {
    v.iter().map(Coefficient::parse).collect()
}

fn mat_in(m: &[Vec<Coefficient>]) -> Result<Vec<Vec<Exact>>> {
    m.iter().map(|r| vec_in(r)).collect()
}

fn vec_out(v: &[Exact]) -> Vec<Coefficient> {
    v.iter().map(Coefficient::from).collect()
}

fn mat_out(m: &[Vec<Exact>]) -> Vec<Vec<Coefficient>> {
    m.iter().map(|r| vec_out(r)).collect()
}

impl MethodDocument {
    pub fn from_method(m: &MriGarkMethod) -> Self {
        MethodDocument {
            name: m.name.clone(),
            order: m.order,
            embedded_order: Some(m.embedded_order),
            c: vec_out(&m.base.c),
            a: mat_out(&m.base.a),
            b: vec_out(&m.base.b),
            b_hat: m.base.b_hat.as_ref().map(|v| vec_out(v)),
            gamma: m.gammas.gamma.iter().map(|g| mat_out(g)).collect(),
            gamma_hat: m.gammas.gamma_hat.as_ref().map(|g| mat_out(g)),
            kind: Some(m.kind),
        }
    }

    pub fn into_method(self) -> Result<MriGarkMethod> {
        let c = vec_in(&self.c)?;
        let dc = increments(&c);
        let base = BaseTableau {
            c,
            a: mat_in(&self.a)?,
            b: vec_in(&self.b)?,
            b_hat: self.b_hat.as_deref().map(vec_in).transpose()?,
            dc,
        };
        let gammas = GammaStack {
            gamma: self.gamma.iter().map(|g| mat_in(g)).collect::<Result<_>>()?,
            gamma_hat: self.gamma_hat.as_deref().map(mat_in).transpose()?,
        };
        let embedded = self.embedded_order.unwrap_or(self.order.saturating_sub(1));
        let m = MriGarkMethod::new(self.name, self.order, embedded, base, gammas)?;
        if let Some(kind) = self.kind {
            if kind != m.kind {
                return Err(Error::InvalidMethod(format!(
                    "{}: declared kind {} but coefficients are {}",
                    m.name,
                    kind.as_str(),
                    m.kind.as_str()
                )));
            }
        }
        Ok(m)
    }
}

pub fn to_json(m: &MriGarkMethod) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MethodDocument::from_method(m))?)
}

pub fn from_json(text: &str) -> Result<MriGarkMethod> {
    let doc: MethodDocument = serde_json::from_str(text)?;
    doc.into_method()
}
