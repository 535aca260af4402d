import json
import os
import tempfile
from pathlib import Path
from typing import Any


def dumps_json(document: Any) -> str:
    """Serializes a document the same way every time, so equal inputs give equal bytes.

    Example:
        >>> dumps_json({"b": 1, "a": [0.5]})
        '{\\n  "a": [\\n    0.5\\n  ],\\n  "b": 1\\n}\\n'
    """
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str | os.PathLike, data: str | bytes) -> None:
    """Writes a file through a temporary sibling and a rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.remove(temp_name)
        raise
