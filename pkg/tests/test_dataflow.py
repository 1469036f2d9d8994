"""Dependency graph tests: reachability, ordering, cycle witnesses."""

import pytest

from sheetlint.dataflow import CyclicDependency, build_graph, referenced_addresses
from sheetlint.model import load_program
from sheetlint.scl import parse_address, parse_formula

DIAMOND = "A1 = ?1\nB1 = =A1+1\nB2 = =A1*2\nC1 = =B1+B2\n"


def addrs(items):
    return [str(a) for a in items]


class TestReferencedAddresses:
    def test_scalar_and_range_references(self):
        got = referenced_addresses(parse_formula("A1+SUM(B1:B3)"))
        assert addrs(got) == ["A1", "B1", "B2", "B3"]

    def test_duplicates_preserved_in_source_order(self):
        got = referenced_addresses(parse_formula("SUM(A1:A2,A1)"))
        assert addrs(got) == ["A1", "A2", "A1"]

    def test_absolute_markers_do_not_matter(self):
        got = referenced_addresses(parse_formula("$A$1+A1"))
        assert addrs(got) == ["A1", "A1"]


class TestGraph:
    def test_edges_point_from_referenced_to_referencing(self):
        graph = build_graph(load_program(DIAMOND))
        assert [(str(s), str(t)) for s, t in graph.edges()] == [
            ("A1", "B1"),
            ("A1", "B2"),
            ("B1", "C1"),
            ("B2", "C1"),
        ]

    def test_precedents_and_dependents(self):
        graph = build_graph(load_program(DIAMOND))
        c1 = parse_address("C1")
        a1 = parse_address("A1")
        assert addrs(sorted(graph.precedents(c1), key=str)) == ["B1", "B2"]
        assert addrs(sorted(graph.precedents(c1, transitive=True), key=str)) == [
            "A1",
            "B1",
            "B2",
        ]
        assert addrs(sorted(graph.dependents(a1), key=str)) == ["B1", "B2"]
        assert addrs(sorted(graph.dependents(a1, transitive=True), key=str)) == [
            "B1",
            "B2",
            "C1",
        ]

    def test_referenced_empty_cells_become_nodes(self):
        graph = build_graph(load_program("B2 = #1\nB12 = =SUM(B2:B4)\n"))
        assert parse_address("B3") in graph.nodes
        assert parse_address("B4") in graph.nodes
        assert graph.precedents(parse_address("B3")) == set()

    def test_leaf_cells_have_no_edges(self):
        graph = build_graph(load_program('A1 = #1\nA2 = "note"\n'))
        assert list(graph.edges()) == []


class TestTopoOrder:
    def test_diamond_order(self):
        graph = build_graph(load_program(DIAMOND))
        assert addrs(graph.topo_order()) == ["A1", "B1", "B2", "C1"]

    def test_precedents_come_first(self):
        text = "A3 = =A2+1\nA2 = =A1+1\nA1 = ?1\nB1 = =SUM(A1:A3)\n"
        order = addrs(build_graph(load_program(text)).topo_order())
        assert order.index("A1") < order.index("A2") < order.index("A3")
        assert order.index("A3") < order.index("B1")

    def test_ties_break_row_major(self):
        text = "B1 = #1\nA2 = #2\nA1 = #3\nB2 = =A1+1\n"
        order = addrs(build_graph(load_program(text)).topo_order())
        assert order == ["A1", "B1", "A2", "B2"]

    def test_order_ignores_source_line_order(self):
        lines = DIAMOND.strip().splitlines()
        a = build_graph(load_program("\n".join(lines)))
        b = build_graph(load_program("\n".join(reversed(lines))))
        assert a.topo_order() == b.topo_order()


class TestCycles:
    def test_two_cell_cycle_witness(self):
        prog = load_program("A1 = =B1+1\nB1 = =A1+1\n")
        with pytest.raises(CyclicDependency) as info:
            build_graph(prog).topo_order()
        assert addrs(info.value.cycle) == ["A1", "B1"]
        assert "A1 -> B1 -> A1" in str(info.value)

    def test_self_reference(self):
        prog = load_program("A1 = =A1+1\n")
        with pytest.raises(CyclicDependency) as info:
            build_graph(prog).topo_order()
        assert addrs(info.value.cycle) == ["A1"]

    def test_cycle_through_own_range(self):
        prog = load_program("B1 = #1\nB2 = =SUM(B1:B3)\n")
        with pytest.raises(CyclicDependency) as info:
            build_graph(prog).topo_order()
        assert addrs(info.value.cycle) == ["B2"]

    def test_witness_excludes_downstream_cells(self):
        prog = load_program("A1 = =B1+1\nB1 = =A1+1\nC1 = =A1+B1\n")
        with pytest.raises(CyclicDependency) as info:
            build_graph(prog).topo_order()
        assert addrs(info.value.cycle) == ["A1", "B1"]

    def test_witness_starts_at_first_row_major_member(self):
        # The same loop written in any source order names the same cycle.
        prog = load_program("C3 = =B2+1\nB2 = =C3+1\nA1 = #5\n")
        with pytest.raises(CyclicDependency) as info:
            build_graph(prog).topo_order()
        assert addrs(info.value.cycle) == ["B2", "C3"]

    def test_acyclic_program_has_no_witness(self):
        build_graph(load_program(DIAMOND)).topo_order()
