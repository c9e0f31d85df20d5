mod common;

use common::{corpus, corpus_source, deploy, introspect, physical, rows, MODES};
use mcdforge::migrate::{diff, emit_migration, DiffError, MigrateError};
use mcdforge::model::{ChangeKind, Classification, ColumnOrigin, ConceptualModel, PhysicalModel, Table};
use mcdforge::parser::parse;
use mcdforge::sql::DialectId;
use mcdforge::testgen::{mutate, random_model, rng, GenConfig};
use mcdforge::transform::TransformMode;
use rusqlite::Connection;

fn pm(file: &str, mode: TransformMode) -> PhysicalModel {
    physical(&parse(&corpus_source(file)).unwrap(), mode)
}

fn apply(conn: &Connection, old: &PhysicalModel, new: &PhysicalModel) {
    let plan = diff(old, new).unwrap();
    let bundle = emit_migration(&plan, DialectId::Embedded, true).unwrap();
    conn.execute_batch(&bundle.concat()).unwrap_or_else(|e| panic!("{e}\n{plan}\n{}", bundle.concat()));
}

#[test]
fn widening_is_one_preserved_item() {
    let plan =
        diff(&pm("matieres_v1.mcd", TransformMode::Identifying), &pm("matieres_v2.mcd", TransformMode::Identifying))
            .unwrap();
    assert_eq!(plan.items.len(), 1, "{plan}");
    let item = &plan.items[0];
    assert_eq!(item.kind, ChangeKind::AlterColumnType);
    assert_eq!(item.classification, Classification::Preserved);
    assert_eq!(item.path, "Matieres.libelle");
    assert_eq!(plan.to_string(), "PRESERVED AlterColumnType Matieres.libelle TEXT(20) -> TEXT(40)\n");
}

#[test]
fn narrowing_is_forced_and_blocked() {
    let plan =
        diff(&pm("matieres_v2.mcd", TransformMode::Identifying), &pm("matieres_v1.mcd", TransformMode::Identifying))
            .unwrap();
    assert_eq!(plan.items.len(), 1);
    assert_eq!(plan.items[0].classification, Classification::Forced);
    for dialect in [DialectId::Oracle, DialectId::Embedded] {
        match emit_migration(&plan, dialect, false) {
            Err(MigrateError::ForcedChangesBlocked(items)) => {
                assert_eq!(items.len(), 1);
                assert!(items[0].path.ends_with("libelle"));
            }
            other => panic!("expected a blocked migration, got {other:?}"),
        }
        assert!(emit_migration(&plan, dialect, true).is_ok());
    }
}

#[test]
fn journaled_widening_touches_the_shadow_column() {
    let old = parse(&corpus_source("examens.mcd")).unwrap();
    let new = parse(&corpus_source("examens.mcd").replace("libelle: token", "libelle: token(300)")).unwrap();
    let old = physical(&old, TransformMode::Identifying);
    let new = physical(&new, TransformMode::Identifying);
    let plan = diff(&old, &new).unwrap();
    let paths: Vec<&str> = plan.items.iter().map(|i| i.path.as_str()).collect();
    assert_eq!(paths, ["Matieres.libelle", "JN_Matieres.libelle"]);
    assert!(!plan.has_forced());
}

#[test]
fn empty_plan_gives_empty_bundle() {
    for (name, model) in corpus() {
        for mode in MODES {
            let p = physical(&model, mode);
            let plan = diff(&p, &p).unwrap();
            assert!(plan.is_empty(), "{name} {mode}: {plan}");
            for dialect in [DialectId::Oracle, DialectId::Embedded] {
                assert!(emit_migration(&plan, dialect, false).unwrap().is_empty());
            }
        }
    }
}

#[test]
fn mode_switch_is_forced_primary_key_change() {
    let old = pm("examens.mcd", TransformMode::Identifying);
    let new = pm("examens.mcd", TransformMode::NonIdentifying);
    let plan = diff(&old, &new).unwrap();
    assert!(plan.verify().is_empty());
    let pk: Vec<String> = plan.items.iter().filter(|i| i.path == "Examens.PK_Exa").map(|i| i.to_string()).collect();
    assert_eq!(pk.len(), 2, "{plan}");
    assert!(pk.iter().all(|l| l.starts_with("FORCED")));
    let conn = deploy(&old);
    apply(&conn, &old, &new);
    assert_eq!(introspect(&conn), introspect(&deploy(&new)));
}

#[test]
fn ambiguous_rename_is_reported() {
    let old = parse("model A { entity E { k: integer «UID-1» «M» a: string(10) } }").unwrap();
    let new = parse("model A { entity E { k: integer «UID-1» «M» b: string(10) } }").unwrap();
    let err =
        diff(&physical(&old, TransformMode::Identifying), &physical(&new, TransformMode::Identifying)).unwrap_err();
    assert_eq!(err, DiffError::AmbiguousRename { table: "Es".into(), dropped: "a".into(), added: "b".into() });
    let other = parse("model A { entity E { k: integer «UID-1» «M» b: integer } }").unwrap();
    let plan =
        diff(&physical(&old, TransformMode::Identifying), &physical(&other, TransformMode::Identifying)).unwrap();
    let kinds: Vec<ChangeKind> = plan.items.iter().map(|i| i.kind).collect();
    assert_eq!(kinds, [ChangeKind::DropColumn, ChangeKind::AddColumn]);
}

fn plan_lines(before: &str, after: &str) -> Vec<String> {
    let model = |fields: &str| {
        let m = parse(&format!("model A {{ entity E {{ k: integer «UID-1» «M» {fields} }} }}")).unwrap();
        physical(&m, TransformMode::Identifying)
    };
    diff(&model(before), &model(after)).unwrap().items.iter().map(|i| i.to_string()).collect()
}

#[test]
fn classification_table() {
    let cases = [
        ("n: decimal(8,2)", "n: decimal(10,2)", "PRESERVED AlterColumnType Es.n NUMERIC(8,2) -> NUMERIC(10,2)"),
        ("n: decimal(8,2)", "n: decimal(10,3)", "PRESERVED AlterColumnType Es.n NUMERIC(8,2) -> NUMERIC(10,3)"),
        ("n: decimal(8,2)", "n: decimal(8,3)", "FORCED AlterColumnType Es.n NUMERIC(8,2) -> NUMERIC(8,3)"),
        ("n: decimal(8,2)", "n: decimal(8,1)", "FORCED AlterColumnType Es.n NUMERIC(8,2) -> NUMERIC(8,1)"),
        ("n: decimal(8,2)", "n: integer", "FORCED AlterColumnType Es.n NUMERIC(8,2) -> INTEGER"),
        ("a: token(10)", "a: word(10)", ""),
        ("a: string(10)", "a: integer", "FORCED AlterColumnType Es.a TEXT(10) -> INTEGER"),
        ("d: date", "d: date init=now()", "PRESERVED AlterColumnType Es.d DATE -> DATE init=now()"),
        ("d: date", "d: date «M»", "FORCED AlterNullability Es.d NULL -> NOT NULL"),
        ("d: date «M»", "d: date", "PRESERVED AlterNullability Es.d NOT NULL -> NULL"),
        ("", "x: integer «M»", "FORCED AddColumn Es.x INTEGER NOT NULL"),
        ("", "y: date «M» init=now()", "PRESERVED AddColumn Es.y DATE init=now() NOT NULL"),
        ("", "z: token", "PRESERVED AddColumn Es.z TEXT(255) NULL"),
        ("z: token", "", "FORCED DropColumn Es.z TEXT(255) NULL"),
        ("z: token", "z: token «UID-2»", "PRESERVED AddConstraint Es.UID2_E UNIQUE (z)"),
        ("z: token «UID-2»", "z: token", "PRESERVED DropConstraint Es.UID2_E UNIQUE (z)"),
    ];
    for (before, after, expected) in cases {
        let lines: Vec<String> = plan_lines(before, after).into_iter().filter(|l| !l.contains("Trigger ")).collect();
        let expected: Vec<&str> = if expected.is_empty() { vec![] } else { vec![expected] };
        assert_eq!(lines, expected, "{before} => {after}");
    }
}

#[test]
fn primary_key_and_foreign_key_changes_are_forced() {
    let lines = plan_lines("", "").into_iter().chain(plan_lines("z: token", "z: token «UID-1»")).collect::<Vec<_>>();
    assert_eq!(lines.len(), 3, "{lines:?}");
    assert!(lines.iter().all(|l| l.starts_with("FORCED")), "{lines:?}");
    let old = parse("model A { entity P { k: integer «UID-1» «M» } entity C { c: integer «UID-1» «M» } association r { parent P [0..1] child C [0..*] } }").unwrap();
    let new = parse("model A { entity P { k: integer «UID-1» «M» } entity C { c: integer «UID-1» «M» } }").unwrap();
    let (o, n) = (physical(&old, TransformMode::Identifying), physical(&new, TransformMode::Identifying));
    let forward: Vec<String> = diff(&o, &n).unwrap().items.iter().map(|i| i.to_string()).collect();
    assert_eq!(
        forward,
        [
            "FORCED DropConstraint Cs.FK_C_P_r FOREIGN KEY (P_r_k) REFERENCES Ps (k)",
            "FORCED DropColumn Cs.P_r_k INTEGER NULL",
        ]
    );
    let back: Vec<String> = diff(&n, &o).unwrap().items.iter().map(|i| i.to_string()).collect();
    assert_eq!(
        back,
        [
            "PRESERVED AddColumn Cs.P_r_k INTEGER NULL",
            "PRESERVED AddConstraint Cs.FK_C_P_r FOREIGN KEY (P_r_k) REFERENCES Ps (k)",
        ]
    );
}

fn surviving_columns(old: &Table, new: &PhysicalModel) -> Vec<String> {
    let Some(t) = new.all_tables().find(|t| t.name == old.name) else {
        return Vec::new();
    };
    old.columns.iter().filter(|c| t.column(&c.name).is_some()).map(|c| c.name.clone()).collect()
}

fn literal(c: &mcdforge::model::Column, i: usize) -> String {
    use mcdforge::model::NeutralType::*;
    match c.sql_type {
        Text(_) => format!("'V{i}'"),
        Integer | Numeric(..) | Interval => format!("{i}"),
        Boolean => format!("{}", i % 2),
        Date => format!("'2020-01-{:02}'", i + 1),
        Timestamp => format!("'2020-01-{:02}T10:00:00.000'", i + 1),
    }
}

/// Inserts `n` rows per table; foreign keys point at the parent row of
/// the same index, so the final state is consistent in any insertion order.
fn populate(conn: &Connection, pm: &PhysicalModel, n: usize) {
    conn.execute_batch("PRAGMA foreign_keys = OFF;").unwrap();
    for t in &pm.logical.tables {
        for i in 0..n {
            let (cols, vals): (Vec<&str>, Vec<String>) = t
                .columns
                .iter()
                .filter(|c| c.origin != ColumnOrigin::Surrogate)
                .map(|c| (c.name.as_str(), resolve(pm, t, c, i)))
                .unzip();
            conn.execute(&format!("INSERT INTO {} ({}) VALUES ({})", t.name, cols.join(", "), vals.join(", ")), [])
                .unwrap();
        }
    }
    conn.execute_batch("PRAGMA foreign_keys = ON;").unwrap();
    let broken: i64 = conn.query_row("SELECT count(*) FROM pragma_foreign_key_check", [], |r| r.get(0)).unwrap();
    assert_eq!(broken, 0);
}

fn resolve(pm: &PhysicalModel, t: &Table, c: &mcdforge::model::Column, i: usize) -> String {
    match t.foreign_keys.iter().find(|fk| fk.columns.contains(&c.name)) {
        Some(fk) => {
            let parent = pm.logical.table(&fk.referenced_table).unwrap();
            let pos = fk.columns.iter().position(|x| x == &c.name).unwrap();
            resolve(pm, parent, parent.column(&fk.referenced_columns[pos]).unwrap(), i)
        }
        None => literal(c, i),
    }
}

fn snapshot(conn: &Connection, old: &PhysicalModel, new: &PhysicalModel) -> Vec<(String, Vec<String>)> {
    old.all_tables().map(|t| (t.name.clone(), rows(conn, &t.name, &surviving_columns(t, new)))).collect()
}

fn pairs(count: u64) -> impl Iterator<Item = (u64, ConceptualModel, ConceptualModel)> {
    (0..count).map(|seed| {
        let mut r = rng(seed);
        let a = random_model(&mut r, GenConfig::default());
        let b = mutate(&mut r, &a);
        (seed, a, b)
    })
}

#[test]
fn apply_and_introspect_matches_fresh_deploy() {
    for (seed, a, b) in pairs(120) {
        for mode in MODES {
            let (old, new) = (physical(&a, mode), physical(&b, mode));
            let plan = diff(&old, &new).unwrap();
            assert!(plan.verify().is_empty(), "seed {seed}");
            let conn = deploy(&old);
            apply(&conn, &old, &new);
            assert_eq!(introspect(&conn), introspect(&deploy(&new)), "seed {seed} {mode}\n{plan}");
            assert!(diff(&new, &new).unwrap().is_empty());
        }
    }
}

#[test]
fn preserved_migrations_keep_rows() {
    let mut checked = 0;
    for (seed, a, b) in pairs(200) {
        for mode in MODES {
            let (old, new) = (physical(&a, mode), physical(&b, mode));
            let plan = diff(&old, &new).unwrap();
            if plan.has_forced() || plan.is_empty() {
                continue;
            }
            let conn = deploy(&old);
            populate(&conn, &old, 3);
            let before = snapshot(&conn, &old, &new);
            let bundle = emit_migration(&plan, DialectId::Embedded, false).unwrap();
            conn.execute_batch(&bundle.concat()).unwrap();
            assert_eq!(snapshot(&conn, &old, &new), before, "seed {seed} {mode}\n{plan}");
            checked += 1;
        }
    }
    assert!(checked >= 50, "only {checked} preserved-only pairs");
}

#[test]
fn corpus_preserved_migration_keeps_rows() {
    let old = pm("matieres_v1.mcd", TransformMode::Identifying);
    let new = pm("matieres_v2.mcd", TransformMode::Identifying);
    let conn = deploy(&old);
    conn.execute_batch(
        "INSERT INTO Matieres (num, code, libelle) VALUES (1, 'MAT', 'Mathematiques');
         INSERT INTO Matieres (num, code, libelle) VALUES (2, 'PHY', 'Physique');",
    )
    .unwrap();
    let cols = vec!["num".to_string(), "code".to_string(), "libelle".to_string()];
    let before = rows(&conn, "Matieres", &cols);
    let plan = diff(&old, &new).unwrap();
    conn.execute_batch(&emit_migration(&plan, DialectId::Embedded, false).unwrap().concat()).unwrap();
    assert_eq!(rows(&conn, "Matieres", &cols), before);
    assert_eq!(introspect(&conn), introspect(&deploy(&new)));
}

#[test]
fn migrations_compose() {
    let mut composed = 0;
    for seed in 0..80 {
        let mut r = rng(1000 + seed);
        let a = random_model(&mut r, GenConfig::default());
        let b = mutate(&mut r, &a);
        let c = mutate(&mut r, &b);
        for mode in MODES {
            let (pa, pb, pc) = (physical(&a, mode), physical(&b, mode), physical(&c, mode));
            if let Err(DiffError::AmbiguousRename { .. }) = diff(&pa, &pc) {
                continue;
            }
            let stepwise = deploy(&pa);
            apply(&stepwise, &pa, &pb);
            apply(&stepwise, &pb, &pc);
            let direct = deploy(&pa);
            apply(&direct, &pa, &pc);
            assert_eq!(introspect(&stepwise), introspect(&direct), "seed {seed} {mode}");
            composed += 1;
        }
    }
    assert!(composed >= 100);
}

#[test]
fn oracle_migration_script() {
    let plan =
        diff(&pm("matieres_v1.mcd", TransformMode::Identifying), &pm("matieres_v2.mcd", TransformMode::Identifying))
            .unwrap();
    let bundle = emit_migration(&plan, DialectId::Oracle, false).unwrap();
    let s = bundle.script("01_structure.sql").unwrap();
    assert!(s.content.contains("ALTER TABLE Matieres MODIFY (libelle VARCHAR2(40) DEFAULT NULL);"), "{}", s.content);
}
