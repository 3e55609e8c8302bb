"""Exercise the Python bindings against the bundled fixtures.

Build and install the extension first:
    pip install --no-build-isolation ./crates/py
then run this file from anywhere.
"""

from pathlib import Path
import tempfile

import simplicial_db as sdb

FIXTURES = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def check(cond, what):
    if not cond:
        raise SystemExit(f"smoke test failed: {what}")
    print(f"ok  {what}")


def main():
    titles = sdb.load(FIXTURES / "join" / "title_last.json")
    names = sdb.load(FIXTURES / "join" / "first_last.json")
    check(isinstance(titles, sdb.Database) and titles.is_valid(), "fixtures load as databases")

    joined = titles.join(names, [("LastName", "LastName")])
    table = joined.global_table()
    check(len(table) == 4, "lossy join has four global rows")
    check([c for c, _ in table.columns()] == ["Title", "LastName", "FirstName"], "joined columns")

    expected = sdb.load(FIXTURES / "join" / "expected_global.json")
    check(table.canonical().to_json() == expected.to_json(), "canonical global table matches the golden file")

    edge = sdb.load(FIXTURES / "misc" / "edge.json")
    barack = sdb.load(FIXTURES / "misc" / "barack.json")
    picked = edge.select(barack)
    rest = edge.delete(barack)
    check(all("Barack" in r for _, r in picked.global_table().rows()), "select keeps Barack rows")
    check(not any("Barack" in r for _, r in rest.global_table().rows()), "delete drops them")
    check(edge.schema().subschema_count() == 5, "edge schema has five subschemas")

    spec = sdb.load(FIXTURES / "misc" / "typespec.json")
    people = sdb.Table.from_csv("id,First:Str,Last:Str\n1,Barack,Obama\nfoo,Barack,Obama\n2,Michelle,Obama\n", spec, "id")
    only = sdb.Table.from_csv("First:Str\nBarack\n", spec)
    check(people.select(["First"], only).keys() == ["1", "foo"], "table select keeps keys 1 and foo")

    with tempfile.TemporaryDirectory() as out:
        shown = sdb.run_script(
            (FIXTURES / "join" / "join.sdb").read_text(),
            input_dir=FIXTURES / "join",
            output_dir=out,
            canonical_keys=True,
        )
        check("Groucho" in shown, "script shows the join")
        saved = (Path(out) / "global.json").read_text()
        check(saved == (FIXTURES / "join" / "expected_global.json").read_text(), "script output matches the golden file")

    try:
        titles.join(names, [("Nowhere", "LastName")])
    except ValueError as e:
        check("Nowhere" in str(e), "engine errors surface as ValueError")
    else:
        raise SystemExit("smoke test failed: bad join did not raise")


if __name__ == "__main__":
    main()
