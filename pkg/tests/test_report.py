import xml.etree.ElementTree as ET

import numpy as np
import pytest

from topicalign.align import alignment_summary
from topicalign.geometry import DistanceMatrix, Layout
from topicalign.ioutil import read_tsv
from topicalign.report import emit_alignment_report, emit_map

SVG_NS = "{http://www.w3.org/2000/svg}"


def layout_of(coords, sizes):
    return Layout(
        coords=np.asarray(coords, dtype=np.float64),
        sizes=np.asarray(sizes, dtype=np.float64),
        stress=0.0,
    )


def parse_svg(path):
    return ET.parse(path).getroot()


def circles(root):
    return list(root.iter(f"{SVG_NS}circle"))


def lines(root):
    return list(root.iter(f"{SVG_NS}line"))


class TestEmitMap:
    def test_circle_count(self, tmp_path):
        layout = layout_of([[-0.2, 0.0], [0.2, 0.0]], [0.6, 0.4])
        emit_map(layout, ["S1", "S2"], tmp_path / "m.svg", tmp_path / "m.html")
        assert len(circles(parse_svg(tmp_path / "m.svg"))) == 2

    def test_area_proportional_to_size(self, tmp_path):
        layout = layout_of([[-0.2, 0.0], [0.2, 0.0]], [0.8, 0.2])
        emit_map(layout, ["S1", "S2"], tmp_path / "m.svg", tmp_path / "m.html")
        radii = sorted(
            (float(c.get("r")) for c in circles(parse_svg(tmp_path / "m.svg"))),
            reverse=True,
        )
        assert (radii[0] / radii[1]) ** 2 == pytest.approx(4.0, rel=0.02)

    def test_twenty_topic_svg_is_wellformed(self, tmp_path, rng):
        coords = rng.uniform(-0.4, 0.4, size=(20, 2))
        sizes = rng.dirichlet(np.full(20, 1.0))
        layout = layout_of(coords, sizes)
        labels = [f"S{i + 1}" for i in range(20)]
        tables = [[(f"term{i}", -1.5)] for i in range(20)]
        emit_map(layout, labels, tmp_path / "m.svg", tmp_path / "m.html", term_tables=tables)
        root = parse_svg(tmp_path / "m.svg")  # strict XML parse
        assert len(circles(root)) == 20
        texts = [t.text for t in root.iter(f"{SVG_NS}text")]
        assert set(labels) <= set(texts)

    def test_labels_escaped(self, tmp_path):
        layout = layout_of([[0.0, 0.0], [0.3, 0.1]], [0.5, 0.5])
        emit_map(layout, ["a<b&c", "d>e"], tmp_path / "m.svg", tmp_path / "m.html")
        root = parse_svg(tmp_path / "m.svg")
        texts = [t.text for t in root.iter(f"{SVG_NS}text")]
        assert "a<b&c" in texts

    def test_html_parses_after_doctype(self, tmp_path):
        layout = layout_of([[0.0, 0.0], [0.3, 0.1]], [0.5, 0.5])
        emit_map(
            layout, ["S1", "S2"], tmp_path / "m.svg", tmp_path / "m.html",
            term_tables=[[("alpha", -2.0)], [("beta", -2.5)]],
        )
        text = (tmp_path / "m.html").read_text("utf-8")
        assert text.startswith("<!DOCTYPE html>")
        ET.fromstring(text.split("\n", 1)[1])

    def test_cluster_colors(self, tmp_path):
        layout = layout_of([[0.0, 0.0], [0.3, 0.1], [0.1, 0.2]], [0.4, 0.3, 0.3])
        emit_map(
            layout, ["S1", "S2", "S3"], tmp_path / "m.svg", tmp_path / "m.html",
            cluster_colors=["medical", "medical", "social"],
        )
        fills = {c.get("fill") for c in circles(parse_svg(tmp_path / "m.svg"))}
        assert len(fills) == 2


class TestAlignmentReport:
    @staticmethod
    def result_with(values, threshold=0.5, top_n=None):
        return alignment_summary(
            DistanceMatrix(values=np.asarray(values, dtype=np.float64), kind="rect_cross"),
            threshold=threshold,
            top_n=top_n,
        )

    def test_line_per_selected_pair(self, tmp_path):
        result = self.result_with([[0.1, 0.9], [0.3, 0.45]])
        layout_a = layout_of([[-0.2, 0.0], [0.2, 0.0]], [0.5, 0.5])
        layout_b = layout_of([[-0.1, 0.1], [0.1, -0.1]], [0.6, 0.4])
        emit_alignment_report(
            result, layout_a, layout_b, ["S1", "S2"], ["D1", "D2"],
            tmp_path / "r.html", tmp_path / "r.tsv", svg_path=tmp_path / "r.svg",
        )
        assert len(lines(parse_svg(tmp_path / "r.svg"))) == 3

    def test_no_pairs_no_lines(self, tmp_path):
        result = self.result_with([[0.8, 0.9], [0.85, 0.95]])
        layout_a = layout_of([[-0.2, 0.0], [0.2, 0.0]], [0.5, 0.5])
        layout_b = layout_of([[-0.1, 0.1], [0.1, -0.1]], [0.6, 0.4])
        emit_alignment_report(
            result, layout_a, layout_b, ["S1", "S2"], ["D1", "D2"],
            tmp_path / "r.html", tmp_path / "r.tsv", svg_path=tmp_path / "r.svg",
        )
        assert len(lines(parse_svg(tmp_path / "r.svg"))) == 0

    def test_echo_topics_have_thick_borders(self, tmp_path):
        result = self.result_with([[0.1, 0.9], [0.8, 0.9]])
        layout_a = layout_of([[-0.2, 0.0], [0.2, 0.0]], [0.5, 0.5])
        layout_b = layout_of([[-0.1, 0.1], [0.1, -0.1]], [0.6, 0.4])
        emit_alignment_report(
            result, layout_a, layout_b, ["S1", "S2"], ["D1", "D2"],
            tmp_path / "r.html", tmp_path / "r.tsv", svg_path=tmp_path / "r.svg",
        )
        widths = [c.get("stroke-width") for c in circles(parse_svg(tmp_path / "r.svg"))]
        assert widths.count("3") == sum(result.echo_a) + sum(result.echo_b)

    def test_tsv_margins_match_recomputation(self, tmp_path, rng):
        values = rng.uniform(0.0, 1.0, size=(4, 3))
        result = self.result_with(values)
        layout_a = layout_of(rng.uniform(-0.3, 0.3, (4, 2)), rng.dirichlet(np.ones(4)))
        layout_b = layout_of(rng.uniform(-0.3, 0.3, (3, 2)), rng.dirichlet(np.ones(3)))
        emit_alignment_report(
            result, layout_a, layout_b,
            [f"S{i}" for i in range(4)], [f"D{j}" for j in range(3)],
            tmp_path / "r.html", tmp_path / "r.tsv",
        )
        header, rows = read_tsv(tmp_path / "r.tsv")
        cells = np.array([[float(x) for x in row[1:4]] for row in rows[:-1]])
        for i, row in enumerate(rows[:-1]):
            assert float(row[4]) == pytest.approx(cells[i].mean(), rel=1e-6)
        footer = rows[-1]
        for j in range(3):
            assert float(footer[1 + j]) == pytest.approx(cells[:, j].mean(), rel=1e-6)
        assert float(footer[4]) == pytest.approx(cells.mean(), rel=1e-6)

    def test_html_wellformed_and_cautionary(self, tmp_path):
        result = self.result_with([[0.1, 0.9], [0.3, 0.45]])
        layout_a = layout_of([[-0.2, 0.0], [0.2, 0.0]], [0.5, 0.5])
        layout_b = layout_of([[-0.1, 0.1], [0.1, -0.1]], [0.6, 0.4])
        emit_alignment_report(
            result, layout_a, layout_b, ["S1", "S2"], ["D1", "D2"],
            tmp_path / "r.html", tmp_path / "r.tsv",
        )
        text = (tmp_path / "r.html").read_text("utf-8")
        ET.fromstring(text.split("\n", 1)[1])
        assert "causal" in text
