import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict

from sympcool.config import RUN_LOG_NAME


def log_run(record: Dict, output_dir: Path) -> Path:
    """
    Appends one JSON line to <output_dir>/run_log.jsonl.

    record must contain:
    {
        command,
        config_hash,
        seed,
        outputs,
        status,
        wall_time_ms
    }
    """

    path = Path(output_dir) / RUN_LOG_NAME

    try:
        entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "command": record["command"],
            "config_hash": record["config_hash"],
            "seed": record["seed"],
            "outputs": [str(p) for p in record["outputs"]],
            "status": record["status"],
            "wall_time_ms": int(record["wall_time_ms"]),
        }

        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(entry, sort_keys=True) + "\n")

    except Exception:
        # Fail closed: a run without its audit line is not reported as a success.
        raise RuntimeError("logging_failure")

    return path
