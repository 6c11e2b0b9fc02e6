use crate::error::Error;
use crate::model::Observable;
use crate::Result;

/// The product outcome space of an ordered variable list.
///
/// Tuples are ordered lexicographically with the last variable varying
/// fastest, matching declaration order of each outcome list. The whole crate
/// relies on this single ordering: LP columns, witness extraction, and
/// serialized enumerations all agree on it.
#[derive(Debug, Clone)]
pub struct JointSpace {
    vars: Vec<Observable>,
}

impl JointSpace {
    pub fn new(vars: Vec<Observable>) -> Self {
        debug_assert!(vars.iter().all(|v| !v.outcomes.is_empty()));
        JointSpace { vars }
    }

    pub fn variables(&self) -> &[Observable] {
        &self.vars
    }

    /// Number of tuples, or an error when it does not fit a usize.
    pub fn size(&self) -> Result<usize> {
        let mut n: usize = 1;
        for v in &self.vars {
            n = n
                .checked_mul(v.outcomes.len())
                .ok_or_else(|| Error::TooLarge("joint outcome space overflows usize".into()))?;
        }
        Ok(n)
    }

    pub fn tuple_at(&self, mut index: usize) -> Vec<String> {
        let mut tuple = vec![String::new(); self.vars.len()];
        for (i, v) in self.vars.iter().enumerate().rev() {
            let k = v.outcomes.len();
            tuple[i] = v.outcomes[index % k].clone();
            index /= k;
        }
        debug_assert_eq!(index, 0, "index out of range");
        tuple
    }

    pub fn index_of(&self, tuple: &[String]) -> Result<usize> {
        if tuple.len() != self.vars.len() {
            return Err(Error::Dimension(format!(
                "tuple has {} entries, expected {}",
                tuple.len(),
                self.vars.len()
            )));
        }
        let mut index = 0;
        for (v, label) in self.vars.iter().zip(tuple) {
            let pos = v.outcomes.iter().position(|o| o == label).ok_or_else(|| {
                Error::Distribution(format!(
                    "`{}` is not an outcome of observable `{}`",
                    label, v.name
                ))
            })?;
            index = index * v.outcomes.len() + pos;
        }
        Ok(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        let n = self.size().expect("joint space fits usize");
        (0..n).map(|i| self.tuple_at(i))
    }
}

/// All outcome tuples of the given variables, in canonical order.
pub fn enumerate_joint_outcomes(vars: &[Observable]) -> Vec<Vec<String>> {
    JointSpace::new(vars.to_vec()).iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_last_variable_fastest() {
        let vars = vec![
            Observable::new("a", &["0", "1"]),
            Observable::new("b", &["x", "y", "z"]),
        ];
        let all = enumerate_joint_outcomes(&vars);
        assert_eq!(
            all,
            vec![
                vec!["0", "x"],
                vec!["0", "y"],
                vec!["0", "z"],
                vec!["1", "x"],
                vec!["1", "y"],
                vec!["1", "z"],
            ]
            .into_iter()
            .map(|t| t.into_iter().map(String::from).collect::<Vec<_>>())
            .collect::<Vec<_>>()
        );
    }

    #[test]
    fn empty_variable_list_has_one_tuple() {
        assert_eq!(enumerate_joint_outcomes(&[]), vec![Vec::<String>::new()]);
    }

    #[test]
    fn index_round_trip() {
        let space = JointSpace::new(vec![
            Observable::new("a", &["0", "1"]),
            Observable::new("b", &["x", "y", "z"]),
            Observable::new("c", &["u", "v"]),
        ]);
        let n = space.size().unwrap();
        assert_eq!(n, 12);
        for i in 0..n {
            assert_eq!(space.index_of(&space.tuple_at(i)).unwrap(), i);
        }
        assert!(space.index_of(&["0".into(), "w".into(), "u".into()]).is_err());
    }
}
