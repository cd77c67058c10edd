import os
import pathlib

import pytest

import curator

SOURCE_DIR = pathlib.Path(os.environ.get("CURATOR_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="session")
def source_dir():
    return SOURCE_DIR


@pytest.fixture(scope="session")
def medpix():
    collection, report = curator.import_source("medpix", {"base_url": str(SOURCE_DIR / "fixtures" / "medpix")})
    return collection, report


@pytest.fixture(scope="session")
def curation_script():
    return (SOURCE_DIR / "fixtures" / "medpix_curation.cdsl").read_text()
