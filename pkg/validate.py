"""Simple validation script to check spectra CSV files before a run."""

import sys
from pathlib import Path

from src.models.errors import SpectraError
from src.parsers.spectra_parser import get_spectra_summary, parse_spectra_csv

DATA_DIR = Path("data")


def validate_spectra_csv(file_path: Path) -> bool:
    """Parse one spectra CSV and print its structure."""
    print(f"\nValidating: {file_path.name}")
    print("=" * 70)
    try:
        ds = parse_spectra_csv(file_path)
    except SpectraError as e:
        print(e.one_line())
        return False

    summary = get_spectra_summary(ds)
    print(f"Samples: {summary['num_samples']} from {summary['num_plants']} plants")
    print(f"  infected: {summary['num_infected']}")
    print(f"  non-infected: {summary['num_non_infected']}")
    print(
        f"Bands: {summary['num_bands']} "
        f"({summary['wavelength_min_nm']:g}-{summary['wavelength_max_nm']:g} nm, "
        f"{'uniform' if summary['uniform_grid'] else 'multi-resolution'} grid)"
    )
    print(f"Stages (GDD): {', '.join(f'{s:g}' for s in summary['stages_gdd'])}")
    return True


def main(paths) -> bool:
    print("Broomrape Spectra - CSV File Validation")
    print("=" * 70)

    files = [Path(p) for p in paths] or sorted(DATA_DIR.glob("*.csv"))
    if not files:
        print(f"ERROR: No CSV files given and none found in {DATA_DIR}/")
        return False

    results = [validate_spectra_csv(f) for f in files]
    print("\n" + "=" * 70)
    print(f"{sum(results)} of {len(results)} file(s) valid")
    return all(results)


if __name__ == "__main__":
    sys.exit(0 if main(sys.argv[1:]) else 1)
