use vne_core::*;

#[test]
fn group_specs_parse_from_tagged_objects() {
    let spec: GroupSpec = serde_json::from_str(r#"{"type":"cyclic","n":4}"#).unwrap();
    assert_eq!(build_group(&spec).unwrap().order(), 4);
    let spec: GroupSpec = serde_json::from_str(
        r#"{"type":"product","factors":[{"type":"cyclic","n":2},{"type":"dihedral","n":3}]}"#,
    )
    .unwrap();
    let g = build_group(&spec).unwrap();
    assert_eq!(g.order(), 12);
    assert!(!g.is_abelian());
    let table: GroupSpec = serde_json::from_str(r#"{"type":"table","mul":[[0,1],[1,0]]}"#).unwrap();
    assert!(build_group(&table).unwrap().is_abelian());

    assert!(serde_json::from_str::<GroupSpec>(r#"{"type":"cyclic","n":4,"extra":1}"#).is_err());
    assert!(serde_json::from_str::<GroupSpec>(r#"{"type":"free","rank":2}"#).is_err());
    let bad: GroupSpec = serde_json::from_str(r#"{"type":"table","mul":[[0,1],[0,1]]}"#).unwrap();
    assert!(build_group(&bad).is_err());
}

#[test]
fn shapes_and_elements_round_trip() {
    let shape: AlgebraShape =
        serde_json::from_str(r#"{"blocks":[{"dim":2,"weight":0.5},{"dim":1,"weight":3}]}"#).unwrap();
    assert_eq!(shape.l2_dim(), 5);
    let json = serde_json::to_string(&shape).unwrap();
    assert_eq!(serde_json::from_str::<AlgebraShape>(&json).unwrap(), shape);

    let nested = vec![vec![vec![[1.0, 0.0], [0.0, -2.0]], vec![[0.5, 0.5], [0.0, 0.0]]], vec![vec![[4.0, 0.0]]]];
    let x = AlgebraElement::from_nested(&shape, &nested).unwrap();
    assert_eq!(x.to_nested(), nested);
    // trace = 0.5 * (1 + 0) + 3 * 4
    assert!((x.trace().re - 12.5).abs() < 1e-15);

    assert!(serde_json::from_str::<AlgebraShape>(r#"{"blocks":[{"dim":2}]}"#).is_err());
    let zero_weight: AlgebraShape = serde_json::from_str(r#"{"blocks":[{"dim":2,"weight":0}]}"#).unwrap();
    assert!(zero_weight.validate().is_err());
}
