from __future__ import annotations

from fractions import Fraction

import pytest

from tropscatter.potential import enumerate_broken_lines
from tropscatter.render import RenderSpec, auto_viewport, render_svg


def test_svg_is_byte_stable(diagram_k2):
    spec = RenderSpec(auto_viewport(diagram_k2), label_walls=True)
    a = render_svg(diagram_k2, spec)
    b = render_svg(diagram_k2, spec)
    assert a == b
    assert a.lstrip().startswith("<?xml") and "<svg" in a


def test_broken_lines_drawn(diagram_k1):
    lines = tuple(enumerate_broken_lines(diagram_k1, (2, 1)))
    plain = render_svg(diagram_k1, RenderSpec(auto_viewport(diagram_k1, [(2, 1)])))
    with_lines = render_svg(diagram_k1, RenderSpec(auto_viewport(diagram_k1, [(2, 1)]), lines=lines))
    assert with_lines != plain


def test_viewport_covers_everything(diagram_k2):
    x0, x1, y0, y1 = auto_viewport(diagram_k2, [(10, -10)])
    assert x0 < 0 and x1 > 10 and y0 < -10 and y1 > 0
    assert x1 - x0 == y1 - y0


def test_zero_area_viewport_rejected():
    with pytest.raises(ValueError):
        RenderSpec((0, 0, -1, 1))
    with pytest.raises(ValueError):
        RenderSpec((Fraction(1), 2, 3, 3))
