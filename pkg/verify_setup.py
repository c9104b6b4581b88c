#!/usr/bin/env python3
"""Setup verification script for the qubit Zeno dynamics engine."""

import os
import sys
from pathlib import Path


def check_python_version():
    """Verify Python version is 3.9+."""
    version = sys.version_info
    if version.major < 3 or (version.major == 3 and version.minor < 9):
        print("❌ Python 3.9+ required")
        return False
    print(f"✅ Python {version.major}.{version.minor}.{version.micro}")
    return True


def check_required_packages():
    """Verify all required packages are installed."""
    required = {
        'numpy': '1.24',
        'scipy': '1.10',
        'lmfit': '1.2',
        'pandas': '2.0',
        'dotenv': '1.0.0',
        'pytz': '2024.1',
    }

    missing = []
    for package, min_version in required.items():
        try:
            pkg = __import__(package)
            version = getattr(pkg, '__version__', 'unknown')
            print(f"✅ {package} ({version}, need >= {min_version})")
        except ImportError:
            print(f"❌ {package} - NOT INSTALLED")
            missing.append(package)

    return len(missing) == 0


def check_environment():
    """Report the optional ZENO_* settings."""
    from dotenv import load_dotenv

    load_dotenv()
    for name, default in (("ZENO_LOG_LEVEL", "WARNING"), ("ZENO_JOBS", "1")):
        value = os.getenv(name)
        if value:
            print(f"✅ {name}={value}")
        else:
            print(f"ℹ️  {name} not set (default {default})")
    return True


def check_directories():
    """Verify required directories exist."""
    all_exist = True
    for dir_path in ('src', 'tests', 'docs'):
        if Path(dir_path).exists():
            print(f"✅ {dir_path}/ exists")
        else:
            print(f"❌ {dir_path}/ missing")
            all_exist = False
    return all_exist


def check_smoke_run():
    """Solve eta for the weak Lorentzian bath."""
    try:
        from src.bath import BathSpec
        from src.renorm import solve_eta

        eta = solve_eta(BathSpec.lorentzian(0.01, 0.09)).eta
        print(f"✅ eta(alpha=0.01, lambda=0.09) = {eta:.5f}")
        return abs(eta - 0.98336) < 1e-4
    except Exception as e:
        print(f"❌ Smoke run failed: {e}")
        return False


def main():
    """Run all verification checks."""
    print("🔍 Verifying qubit Zeno dynamics setup\n")
    print("=" * 60)

    checks = [
        ("Python Version", check_python_version),
        ("Required Packages", check_required_packages),
        ("Environment", check_environment),
        ("Directories", check_directories),
        ("Smoke Run", check_smoke_run),
    ]

    results = []
    for name, check_func in checks:
        print(f"\n{name}:")
        print("-" * 60)
        result = check_func()
        results.append((name, result))

    print("\n" + "=" * 60)
    print("\n📊 Summary:")
    print("-" * 60)

    all_passed = True
    for name, result in results:
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"{status}: {name}")
        if not result:
            all_passed = False

    print("\n" + "=" * 60)

    if all_passed:
        print("\n🎉 Setup verification complete! Try:")
        print("   python app.py reproduce fig3 --jobs 4")
        return 0
    else:
        print("\n⚠️  Some checks failed. Please fix the issues above.")
        print("   Install missing packages: pip install -r requirements.txt")
        return 1


if __name__ == "__main__":
    sys.exit(main())
