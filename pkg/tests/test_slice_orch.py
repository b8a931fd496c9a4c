import slice_orch


def test_version():
    assert slice_orch.__version__ == "0.1.0"
