//! Small built-in datasets for examples and tests.

use crate::relation::Relation;
use crate::rules::{parse_rules_str, Rule};

/// Six-row hospital listing with a typo in t2.CT, a wrong city and phone in
/// t3, a wrong state in t4, and duplicate entities.
pub const HOSPITAL_CSV: &str = "HN,CT,ST,PN
ALABAMA,DOTHAN,AL,3347938701
ALABAMA,DOTH,AL,3347938701
ELIZA,DOTHAN,AL,2567638410
ELIZA,BOAZ,AK,2567688400
ELIZA,BOAZ,AL,2567688400
ELIZA,BOAZ,AL,2567688400
";

/// A city determines its state, equal phone numbers imply equal states, and
/// the ELIZA hospital in BOAZ has a fixed phone number.
pub const HOSPITAL_RULES: &str = r#"# hospital rules
FD: CT -> ST
DC: !(PN(t)=PN(t') & ST(t)!=ST(t'))
CFD: HN="ELIZA", CT="BOAZ" -> PN="2567688400"
"#;

pub fn hospital() -> (Relation, Vec<Rule>) {
    let rel =
        Relation::from_reader(HOSPITAL_CSV.as_bytes(), b',', true).expect("built-in sample parses");
    let rules = parse_rules_str(HOSPITAL_RULES, rel.schema()).expect("built-in rules parse");
    (rel, rules)
}
