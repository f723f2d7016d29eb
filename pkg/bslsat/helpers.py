import json
import os
from datetime import datetime


def get_timestamp():
    return datetime.now().isoformat()


def write_text(path, text):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def to_json(data):
    """Pretty JSON with sorted keys; non-JSON values are rendered with str()."""
    return json.dumps(data, indent=2, sort_keys=True, default=str)
