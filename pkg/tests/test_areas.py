"""Area inference tests: physical ranges, copy groups, shape groups."""

from sheetlint.areas import (
    infer_logical_areas,
    infer_physical_areas,
    structural_groups,
)
from sheetlint.model import load_program

ONE_COLUMN_SUBTOTALS = (
    "H3 = #500\nH4 = #1000\nH5 = #900\nH6 = =SUM(H3:H5)\n"
    "H7 = #600\nH8 = #900\nH9 = #1000\nH10 = =SUM(H7:H9)\n"
    "H11 = #700\nH12 = #800\nH13 = #500\nH14 = =SUM(H11:H13)\n"
    "H15 = =H6+H10+H14\n"
)


def addrs(items):
    return [str(a) for a in items]


class TestPhysicalAreas:
    def test_one_grouping_call_one_area(self):
        prog = load_program(
            'B2 = "1. Quarter"\nB4 = #140\nB5 = #200\nB12 = =SUM(B2:B10)\n'
        )
        areas = infer_physical_areas(prog)
        assert len(areas) == 1
        area = areas[0]
        assert str(area.rect) == "B2:B10"
        assert str(area.consumer) == "B12"
        assert area.function == "SUM"
        assert str(area) == "SUM B2:B10 -> B12"

    def test_two_ranges_in_one_formula(self):
        prog = load_program(
            "A1 = #1\nA2 = #2\nB1 = #3\nB2 = #4\nC1 = =SUM(A1:A2)/SUM(B1:B2)\n"
        )
        areas = infer_physical_areas(prog)
        assert [str(a.rect) for a in areas] == ["A1:A2", "B1:B2"]
        assert all(str(a.consumer) == "C1" for a in areas)

    def test_shared_rectangle_yields_one_area_per_consumer(self):
        prog = load_program(
            "A1 = #1\nA2 = #2\nB1 = =SUM(A1:A2)\nB2 = =AVG(A1:A2)\n"
        )
        areas = infer_physical_areas(prog)
        assert [(str(a.consumer), a.function) for a in areas] == [
            ("B1", "SUM"),
            ("B2", "AVG"),
        ]

    def test_scalar_only_call_has_no_area(self):
        prog = load_program("A1 = #1\nA2 = #2\nB1 = =SUM(A1,A2)\n")
        assert infer_physical_areas(prog) == []

    def test_majority_type_counts_content_kinds(self):
        prog = load_program(
            'B2 = "1. Quarter"\nB4 = #140\nB5 = #200\nB7 = "2. Quarter"\n'
            "B8 = #180\nB12 = =SUM(B2:B10)\n"
        )
        assert infer_physical_areas(prog)[0].majority_type == "constant"

    def test_majority_tie_prefers_data_kinds(self):
        prog = load_program('A1 = #1\nA2 = "x"\nB1 = =SUM(A1:A2)\n')
        assert infer_physical_areas(prog)[0].majority_type == "constant"
        prog = load_program("A1 = ?1\nA2 = =A1+1\nB1 = =SUM(A1:A2)\n")
        assert infer_physical_areas(prog)[0].majority_type == "input"

    def test_majority_of_empty_range_is_none(self):
        prog = load_program("B1 = =COUNT(D1:D4)\n")
        assert infer_physical_areas(prog)[0].majority_type is None


class TestLogicalAreas:
    def test_subtotal_copies_form_one_area(self):
        areas = infer_logical_areas(load_program(ONE_COLUMN_SUBTOTALS))
        assert len(areas) == 1
        assert addrs(areas[0].members) == ["H6", "H10", "H14"]
        assert str(areas[0].hull) == "H6:H14"
        assert str(areas[0]) == "3 copies in H6:H14"

    def test_members_need_not_be_adjacent(self):
        prog = load_program("A1 = #1\nA9 = #2\nC1 = =A1*2\nC9 = =A9*2\n")
        areas = infer_logical_areas(prog)
        assert len(areas) == 1
        assert addrs(areas[0].members) == ["C1", "C9"]
        assert str(areas[0].hull) == "C1:C9"

    def test_same_text_different_meaning_is_not_a_copy(self):
        # Both cells read A1, but relative offsets differ.
        prog = load_program("A1 = #1\nC1 = =A1*2\nC2 = =A1*2\n")
        assert infer_logical_areas(prog) == []

    def test_absolute_references_pin_copies_together(self):
        prog = load_program("A1 = #1\nC1 = =$A$1*2\nD5 = =$A$1*2\n")
        areas = infer_logical_areas(prog)
        assert len(areas) == 1
        assert addrs(areas[0].members) == ["C1", "D5"]
        assert str(areas[0].hull) == "C1:D5"

    def test_areas_ordered_by_first_member(self):
        prog = load_program(
            "A1 = #1\nA2 = #2\n"
            "B1 = =A1*2\nB2 = =A2*2\n"
            "C1 = =$A$1+1\nD1 = =$A$1+1\n"
        )
        areas = infer_logical_areas(prog)
        assert [addrs(a.members) for a in areas] == [["B1", "B2"], ["C1", "D1"]]


class TestStructuralGroups:
    def test_shape_alike_formulas_group(self):
        prog = load_program("A1 = #1\nB7 = #2\nC1 = =A1*2\nC9 = =B7*3\n")
        groups = structural_groups(prog)
        assert len(groups) == 1
        assert addrs(groups[0].members) == ["C1", "C9"]

    def test_different_operator_splits_the_group(self):
        prog = load_program("A1 = #1\nC1 = =A1+2\nC2 = =A1*2\n")
        assert structural_groups(prog) == []

    def test_copies_share_a_group_with_near_misses(self):
        prog = load_program(
            "A1 = #1\nA2 = #2\nA3 = #3\n"
            "C1 = =A1*2\nC2 = =A2*2\nC3 = =$A$3*9\n"
        )
        groups = structural_groups(prog)
        assert len(groups) == 1
        assert addrs(groups[0].members) == ["C1", "C2", "C3"]
        # The exact copies also form a logical area inside the group.
        areas = infer_logical_areas(prog)
        assert len(areas) == 1
        assert addrs(areas[0].members) == ["C1", "C2"]
