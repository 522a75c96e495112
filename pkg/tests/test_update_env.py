import pytest

from scripts.update_env import update_env_variable


def test_settings_are_written_and_replaced(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    update_env_variable("POLYVAR_LIMITS__MAX_DIM", "6")
    update_env_variable("POLYVAR_RUN__CONCURRENCY", "2")
    update_env_variable("POLYVAR_LIMITS__MAX_DIM", "5")
    assert (tmp_path / ".env").read_text().splitlines() == ["POLYVAR_LIMITS__MAX_DIM=5", "POLYVAR_RUN__CONCURRENCY=2"]


@pytest.mark.parametrize(
    "key, value",
    [("MAX_DIM", "6"), ("POLYVAR_LIMITS__MAX_DEPTH", "6"), ("POLYVAR_LIMITS__MAX_DIM", "six")],
)
def test_invalid_settings_are_refused(tmp_path, monkeypatch, key, value):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ValueError):
        update_env_variable(key, value)
    assert not (tmp_path / ".env").exists()
