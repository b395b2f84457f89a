mod common;

use common::doc::{
    between, html_custody_tables, latex_custody_tables, latex_normal, unescape_html, unescape_latex,
};
use ftklipse_core::casework::{Case, FrontMatter, Region};
use ftklipse_core::reporting::{
    build_report_spec, find_toolchain, generator_for, render_pdf, write_report, Excerpt,
    HtmlGenerator, LatexGenerator, ReportGenerator, ReportSelection, ReportSpec,
};
use ftklipse_core::{AdapterKind, Casework, Error};
use proptest::prelude::*;

struct Fixture {
    _root: tempfile::TempDir,
    src: tempfile::TempDir,
    work: Casework,
    case: u64,
}

fn fixture(names: &[&str], notes: &[&str]) -> Fixture {
    let root = tempfile::tempdir().unwrap();
    let src = tempfile::tempdir().unwrap();
    let work = Casework::open(root.path(), AdapterKind::Memory).unwrap();
    let case = work.create_case("Report & <case>", "Inspector {X}").unwrap().id;
    for (i, name) in names.iter().enumerate() {
        let bytes: Vec<u8> = (0..200u32).map(|b| (b * 7 + i as u32) as u8).collect();
        let p = common::write_file(src.path(), &format!("src{i}"), &bytes);
        let ev = work.import_evidence_as(case, &p, name, "examiner").unwrap();
        work.verify_evidence(ev.id, "examiner").unwrap();
        for (j, text) in notes.iter().enumerate() {
            let region = (j % 2 == 0).then_some(Region { offset: 10, length: 4 });
            work.add_note(ev.id, "examiner", text, region).unwrap();
        }
    }
    Fixture { _root: root, src, work, case }
}

impl Fixture {
    fn spec(&self, selection: &ReportSelection, fm: Option<FrontMatter>) -> (ReportSpec, Case) {
        let spec = build_report_spec(&self.work, self.case, selection, fm, "examiner").unwrap();
        (spec, self.work.case(self.case).unwrap())
    }

    fn ids(&self) -> Vec<u64> {
        self.work.case(self.case).unwrap().evidences.iter().map(|e| e.id).collect()
    }
}

fn generate(g: &dyn ReportGenerator, f: &Fixture, spec: &ReportSpec, case: &Case) -> String {
    g.generate(spec, case, f.work.data_root()).unwrap()
}

#[test]
fn latex_structure_and_escaping() {
    let f = fixture(&["a_b%c.txt", "plain.bin"], &["first note"]);
    let (spec, case) = f.spec(&ReportSelection::default(), None);
    let doc = generate(&LatexGenerator, &f, &spec, &case);
    assert!(doc.starts_with("\\documentclass"));
    assert_eq!(doc.matches("\\section{").count(), 2);
    assert!(doc.contains("a\\_b\\%c.txt"));
    let pos = |needle: &str| doc.find(needle).unwrap_or_else(|| panic!("{needle} missing"));
    assert!(pos("\\maketitle") < pos("Executive Summary"));
    assert!(pos("Executive Summary") < pos("Introduction"));
    assert!(pos("Introduction") < pos("\\section{"));
    assert!(doc.rfind("\\section{").unwrap() < pos("\\section*{Conclusion}"));
    assert!(doc.trim_end().ends_with("\\end{document}"));
}

#[test]
fn spec_validation() {
    let f = fixture(&["a.bin", "b.bin"], &[]);
    let ids = f.ids();
    let all = build_report_spec(&f.work, f.case, &ReportSelection::default(), None, "x").unwrap();
    assert_eq!(all.include_evidence_ids, ids);
    let before: Vec<usize> = ids.iter().map(|id| f.work.list_custody(*id).unwrap().len()).collect();

    let bad = [
        ReportSelection { evidence_ids: Some(vec![999]), ..Default::default() },
        ReportSelection {
            evidence_ids: Some(vec![ids[0]]),
            excerpts: vec![Excerpt { evidence_id: ids[0], offset: 190, length: 16, caption: String::new() }],
            ..Default::default()
        },
        ReportSelection {
            evidence_ids: Some(vec![ids[0]]),
            excerpts: vec![Excerpt { evidence_id: ids[1], offset: 0, length: 1, caption: String::new() }],
            ..Default::default()
        },
    ];
    for sel in bad {
        let err = build_report_spec(&f.work, f.case, &sel, None, "x").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err:?}");
    }
    let after: Vec<usize> = ids.iter().map(|id| f.work.list_custody(*id).unwrap().len()).collect();
    assert_eq!(before, after, "failed builds must not touch custody");

    let one = ReportSelection { evidence_ids: Some(vec![ids[1], ids[1]]), ..Default::default() };
    let spec = build_report_spec(&f.work, f.case, &one, None, "x").unwrap();
    assert_eq!(spec.include_evidence_ids, [ids[1]]);
    let last = f.work.list_custody(ids[1]).unwrap().pop().unwrap();
    assert_eq!(last.operation.as_str(), "exported_to_report");
    assert_eq!(f.work.list_custody(ids[0]).unwrap().len(), after[0]);

    assert!(matches!(generator_for("rtf"), Err(Error::UnsupportedFormat { .. })));
}

#[test]
fn custody_tables_hold_every_event_once() {
    let f = fixture(&["one", "two", "three"], &["n1", "n2 & more"]);
    let (spec, case) = f.spec(&ReportSelection::default(), None);
    let latex = generate(&LatexGenerator, &f, &spec, &case);
    let html = generate(&HtmlGenerator, &f, &spec, &case);
    let lt = latex_custody_tables(&latex);
    let ht = html_custody_tables(&html);
    assert_eq!((lt.len(), ht.len()), (3, 3));
    for (i, ev) in case.evidences.iter().enumerate() {
        let custody = f.work.list_custody(ev.id).unwrap();
        assert_eq!(lt[i].len(), custody.len());
        assert_eq!(ht[i].len(), custody.len());
        for ((l, h), event) in lt[i].iter().zip(&ht[i]).zip(&custody) {
            assert_eq!(l[0], event.seq.to_string());
            assert_eq!(unescape_latex(&l[1]).unwrap(), event.principal);
            assert_eq!(unescape_latex(&l[3]).unwrap(), event.operation.as_str());
            assert_eq!(unescape_latex(&l[4]).unwrap(), latex_normal(&event.detail));
            assert_eq!(h[0], event.seq.to_string());
            assert_eq!(unescape_html(&h[4]).unwrap(), event.detail);
        }
    }
    let no_custody = ReportSelection { include_custody: false, include_notes: false, ..Default::default() };
    let (spec, case) = f.spec(&no_custody, None);
    let doc = generate(&LatexGenerator, &f, &spec, &case);
    assert!(!doc.contains("longtable}{"));
    assert!(!doc.contains("n2 \\& more"));
}

#[test]
fn excerpts_equal_independent_hex() {
    let f = fixture(&["dump.bin"], &["inside", "outside"]);
    let id = f.ids()[0];
    let sel = ReportSelection {
        excerpts: vec![
            Excerpt { evidence_id: id, offset: 8, length: 40, caption: "Header_1".into() },
            Excerpt { evidence_id: id, offset: 150, length: 50, caption: String::new() },
        ],
        ..Default::default()
    };
    let (spec, case) = f.spec(&sel, None);
    let source = f.src.path().join("src0");
    let latex = generate(&LatexGenerator, &f, &spec, &case);
    let blocks = between(&latex, "\\begin{alltt}\n", "\\end{alltt}");
    assert_eq!(blocks.len(), 2);
    for (block, ex) in blocks.iter().zip(&spec.excerpts) {
        let text: String = block.lines().map(|l| unescape_latex(l).unwrap() + "\n").collect();
        assert_eq!(common::parse_hex_dump(&text, ex.offset), common::read_slice(&source, ex.offset, ex.length));
    }
    assert!(latex.contains("Excerpt: Header\\_1 (offset 8, 40 bytes)"));
    // Only the first note has a region, and it overlaps [8, 48).
    assert_eq!(latex.matches("(excerpted region)").count(), 1);

    let html = generate(&HtmlGenerator, &f, &spec, &case);
    let pres = between(&html, "<pre class=\"hex\">", "</pre>");
    for (pre, ex) in pres.iter().zip(&spec.excerpts) {
        let text = unescape_html(pre).unwrap();
        assert_eq!(common::parse_hex_dump(&text, ex.offset), common::read_slice(&source, ex.offset, ex.length));
    }
}

#[test]
fn output_is_deterministic_and_written_under_reports() {
    let f = fixture(&["x"], &["n"]);
    let fm = FrontMatter {
        executive_summary: "Summary.\n\nSecond paragraph.".into(),
        introduction: "Intro".into(),
        conclusion: "Done".into(),
    };
    let (spec, case) = f.spec(&ReportSelection::default(), Some(fm.clone()));
    assert_eq!(f.work.case(f.case).unwrap().front_matter, fm);
    for g in [&LatexGenerator as &dyn ReportGenerator, &HtmlGenerator] {
        let a = generate(g, &f, &spec, &case);
        let b = generate(g, &f, &spec.clone(), &case.clone());
        assert_eq!(a, b);
        let (path, doc) = write_report(g, &spec, &case, f.work.data_root()).unwrap();
        assert_eq!(doc, a);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
        assert!(path.starts_with(f.work.data_root().join(f.case.to_string()).join("reports")));
        assert_eq!(path.extension().unwrap(), g.file_extension());
    }
}

#[test]
fn missing_toolchain_keeps_latex_source() {
    let f = fixture(&["x"], &[]);
    let (spec, case) = f.spec(&ReportSelection::default(), None);
    let err = render_pdf(&spec, &case, f.work.data_root(), "ftk-no-such-latex").unwrap_err();
    assert!(matches!(err, Error::Unavailable(_)), "{err:?}");
    let dir = f.work.data_root().join(f.case.to_string()).join("reports");
    let tex: Vec<_> = std::fs::read_dir(dir).unwrap().collect();
    assert_eq!(tex.len(), 1);
}

#[test]
fn pdf_when_toolchain_present() {
    if find_toolchain("pdflatex").is_none() {
        eprintln!("pdflatex not installed, skipping");
        return;
    }
    let f = fixture(&["weird #$%&_{}~^\\ name é.bin"], &["note with \\input{/etc/passwd}"]);
    let id = f.ids()[0];
    let sel = ReportSelection {
        excerpts: vec![Excerpt { evidence_id: id, offset: 0, length: 64, caption: "~^".into() }],
        ..Default::default()
    };
    let fm = FrontMatter {
        executive_summary: "\\badcmd{} $x$ 100% & more".into(),
        ..Default::default()
    };
    let (spec, case) = f.spec(&sel, Some(fm));
    let pdf = render_pdf(&spec, &case, f.work.data_root(), "pdflatex").unwrap();
    let bytes = std::fs::read(pdf).unwrap();
    assert!(bytes.starts_with(b"%PDF"));
}

fn hostile() -> impl Strategy<Value = String> {
    prop_oneof![
        "[#$%&_{}~^\\\\<>\"' a-z\\n\\t]{1,24}",
        any::<String>(),
        "\\PC{1,12}",
    ]
    .prop_filter("non-blank", |s| !s.trim().is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hostile_names_and_notes_are_escaped(name in hostile(), note in hostile(), summary in hostile()) {
        let f = fixture(&[&name], &[&note]);
        let fm = FrontMatter { executive_summary: summary.clone(), ..Default::default() };
        let (spec, case) = f.spec(&ReportSelection::default(), Some(fm));
        let id = case.evidences[0].id;

        let latex = generate(&LatexGenerator, &f, &spec, &case);
        let heading = between(&latex, "\\section{", "}\n");
        prop_assert_eq!(heading.len(), 1);
        prop_assert_eq!(unescape_latex(heading[0]).unwrap(), format!("Evidence {id}: {}", latex_normal(&name)));
        let item = between(&latex, "\\item ", "\n")[0];
        let (_, text) = item.split_once(": ").unwrap();
        prop_assert_eq!(unescape_latex(text).unwrap(), latex_normal(&note));
        for row in latex_custody_tables(&latex).concat() {
            for cell in row {
                prop_assert!(unescape_latex(&cell).is_ok(), "{}", cell);
            }
        }
        let summary_text = between(&latex, "\\section*{Executive Summary}\n", "\\section*{Introduction}")[0];
        for para in summary_text.split("\n\n").filter(|p| !p.trim().is_empty()) {
            prop_assert!(unescape_latex(para.trim()).is_ok(), "{}", para);
        }

        let html = generate(&HtmlGenerator, &f, &spec, &case);
        let h2 = between(&html, "<h2>Evidence ", "</h2>")[0];
        prop_assert_eq!(unescape_html(h2).unwrap(), format!("{id}: {name}"));
        let li = between(&html, "<li>", "</li>")[0];
        let (_, text) = li.split_once(": ").unwrap();
        prop_assert_eq!(unescape_html(text).unwrap(), note);
        for row in html_custody_tables(&html).concat() {
            for cell in row {
                prop_assert!(unescape_html(&cell).is_ok());
            }
        }
    }
}
