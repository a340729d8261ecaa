//! Canonical JSON: sorted keys, shortest round-trip floats, `"inf"` for
//! undefined interval lengths.

use serde::Serialize;
use serde_json::{json, Map, Value};
use weightscape_core::conformal::SelectionResult;

/// Serializes through `Value`, whose object maps keep keys sorted.
pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("in-memory serialization cannot fail")
}

pub fn to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("in-memory serialization cannot fail");
    s.push('\n');
    s
}

/// Finite values as numbers, `+∞` as the string `"inf"`.
pub fn length_value(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else {
        Value::Null
    }
}

pub fn selection_value(r: &SelectionResult) -> Value {
    let lengths: Map<String, Value> = r
        .lengths
        .iter()
        .map(|(s, &l)| (s.as_str().to_string(), length_value(l)))
        .collect();
    json!({
        "chosen": r.chosen.as_str(),
        "lengths": lengths,
        "splits": to_value(&r.splits),
        "alpha": r.alpha,
        "seed": r.seed,
        "notes": r.notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use weightscape_core::{MethodSpec, WeightSolution, WeightSpace};

    #[test]
    fn keys_are_sorted() {
        let v = json!({"b": 1, "a": {"d": 2, "c": 3}});
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":{"c":3,"d":2},"b":1}"#
        );
    }

    #[test]
    fn solution_round_trip_is_exact() {
        let mut sol = WeightSolution::new(
            vec![0.1, 2.0 / 3.0, -1e-300],
            WeightSpace::C,
            MethodSpec::Regression,
        );
        sol.multipliers.lower = Some(vec![0.0, 1.0 / 7.0, 5e-17]);
        sol.multipliers.upper = Some(vec![0.0; 3]);
        sol.active_set = vec![0, 2];
        sol.intercept = Some(std::f64::consts::PI);
        sol.unique_certified = Some(true);
        let text = to_string(&to_value(&sol));
        let back: WeightSolution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sol);
        assert!(text.contains("\"box\""));
    }

    #[test]
    fn infinite_lengths_become_strings() {
        assert_eq!(length_value(f64::INFINITY), json!("inf"));
        assert_eq!(length_value(0.5), json!(0.5));
    }
}
