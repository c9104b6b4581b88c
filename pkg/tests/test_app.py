"""Basic tests for the command-line launcher."""

import pytest


class TestAppStructure:
    """Test the app structure and imports."""

    def test_app_imports(self):
        """Test that app.py can be imported without errors."""
        try:
            import app
            assert app is not None
        except ImportError as e:
            pytest.fail(f"Failed to import app: {e}")

    def test_app_main_is_cli_main(self):
        """Test that app delegates to the CLI entry point."""
        import app
        from src.cli import main

        assert app.main is main

    def test_version_flag(self, capsys):
        """Test that --version prints the package version."""
        import app
        from src import __version__

        with pytest.raises(SystemExit) as exc_info:
            app.main(["--version"])
        assert exc_info.value.code == 0
        assert __version__ in capsys.readouterr().out
