import io

import numpy as np
import pytest

from rational_spde.errors import MeshError
from rational_spde.persistence.file_format import MeshBody, MeshHeader

TRIANGLE = """nodes 3 triangles 1
0.0 0.0 1 1
1.0 0.0 1 1
0.0 1.0 1 1
0 1 2
"""


class TestMeshHeader:
    def test_read(self):
        header = MeshHeader.read(io.StringIO(TRIANGLE))
        assert header == MeshHeader(3, 1)

    def test_write(self):
        file = io.StringIO()
        MeshHeader(25, 32).write(file)
        assert file.getvalue() == "nodes 25 triangles 32\n"

    @pytest.mark.parametrize(
        "text",
        ["", "vertices 3 faces 1\n", "nodes three triangles 1\n", "nodes 2 triangles 1\n"],
    )
    def test_rejects(self, text):
        with pytest.raises(MeshError):
            MeshHeader.read(io.StringIO(text))


class TestMeshBody:
    def test_read(self):
        file = io.StringIO(TRIANGLE)
        body = MeshBody.read(MeshHeader.read(file), file)
        np.testing.assert_array_equal(body.nodes, [[0, 0], [1, 0], [0, 1]])
        np.testing.assert_array_equal(body.triangles, [[0, 1, 2]])
        assert body.flag_columns.sum() == 6

    def test_write_keeps_full_precision(self):
        body = MeshBody(np.array([[0.1, 1 / 3]]), np.array([[0, 1]]), np.array([[0, 0, 0]]))
        file = io.StringIO()
        body.write(file)
        assert file.getvalue() == "0.1 0.3333333333333333 0 1\n0 0 0\n"

    @pytest.mark.parametrize(
        "text",
        [
            "nodes 3 triangles 1\n0 0 1 1\n1 0 1 1\n",
            "nodes 3 triangles 1\n0 0 1 1\n1 0 1 1\n0 1 1\n0 1 2\n",
            "nodes 3 triangles 1\n0 0 1 1\n1 0 1 1\n0 1 2 1\n0 1 2\n",
            "nodes 3 triangles 1\n0 0 1 1\n1 0 1 1\n0 1 1 1\n0 1 x\n",
        ],
    )
    def test_rejects(self, text):
        file = io.StringIO(text)
        with pytest.raises(MeshError):
            MeshBody.read(MeshHeader.read(file), file)
