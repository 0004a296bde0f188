// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Dotted hardware channel names, optionally templated on qubit inputs
//! (`channels.aom.raman.individual{ion}.dds0`).

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelName(String);

impl ChannelName {
    pub fn new(name: impl Into<String>) -> ChannelName {
        ChannelName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_template(&self) -> bool {
        self.0.contains('{')
    }

    /// Input names referenced by `{...}` placeholders, in order.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut rest = self.0.as_str();
        while let Some(open) = rest.find('{') {
            let Some(close) = rest[open..].find('}') else { break };
            out.push(&rest[open + 1..open + close]);
            rest = &rest[open + close + 1..];
        }
        out
    }

    /// Replaces every placeholder; returns the first unresolved name on failure.
    pub fn substitute(&self, lookup: &impl Fn(&str) -> Option<String>) -> Result<ChannelName, String> {
        let mut out = String::with_capacity(self.0.len());
        let mut rest = self.0.as_str();
        while let Some(open) = rest.find('{') {
            let close = rest[open..].find('}').ok_or_else(|| rest[open..].to_string())? + open;
            let name = &rest[open + 1..close];
            out.push_str(&rest[..open]);
            out.push_str(&lookup(name).ok_or_else(|| name.to_string())?);
            rest = &rest[close + 1..];
        }
        out.push_str(rest);
        Ok(ChannelName(out))
    }

    /// Checks the `channels(.<ident>)+` grammar. Placeholders count as
    /// identifier characters.
    pub fn validate(&self) -> Result<(), String> {
        let mut parts = self.0.split('.');
        if parts.next() != Some("channels") {
            return Err(format!("channel `{}` must start with `channels.`", self.0));
        }
        let mut count = 0;
        for part in parts {
            count += 1;
            if part.is_empty() || !valid_segment(part) {
                return Err(format!("channel `{}` has an invalid segment `{part}`", self.0));
            }
        }
        if count == 0 {
            return Err(format!("channel `{}` names no device", self.0));
        }
        Ok(())
    }
}

fn valid_segment(part: &str) -> bool {
    let mut depth = 0;
    for c in part.chars() {
        match c {
            '{' if depth == 0 => depth = 1,
            '}' if depth == 1 => depth = 0,
            c if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '/' && depth == 1 => {}
            _ => return false,
        }
    }
    depth == 0
}

impl fmt::Display for ChannelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ChannelName {
    fn from(s: &str) -> Self {
        ChannelName(s.to_string())
    }
}

impl From<String> for ChannelName {
    fn from(s: String) -> Self {
        ChannelName(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert!(ChannelName::from("channels.aom.raman.individual1.dds0").validate().is_ok());
        assert!(ChannelName::from("channels.aom.raman.individual{ion}.dds0").validate().is_ok());
        assert!(ChannelName::from("channels").validate().is_err());
        assert!(ChannelName::from("aom.dds0").validate().is_err());
        assert!(ChannelName::from("channels..dds0").validate().is_err());
        assert!(ChannelName::from("channels.a b").validate().is_err());
        assert!(ChannelName::from("channels.x{y").validate().is_err());
    }

    #[test]
    fn templates() {
        let c = ChannelName::from("channels.aom.raman.individual{ion}.dds{tone}");
        assert_eq!(c.placeholders(), ["ion", "tone"]);
        let s = c
            .substitute(&|n| match n {
                "ion" => Some("3".into()),
                "tone" => Some("1".into()),
                _ => None,
            })
            .unwrap();
        assert_eq!(s.as_str(), "channels.aom.raman.individual3.dds1");
        assert_eq!(c.substitute(&|_| None), Err("ion".to_string()));
    }
}
