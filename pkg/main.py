# main.py
import glob
import os
import sys
from datetime import datetime

from braid import braid_loop
from catastrophe import sample_surface_parametric
from cli import MESH_COLUMNS, STRAND_COLUMNS, cli
from config import DEFAULT_CONFIG, get_logger, setup_logger
from export import write_json, write_table
from loops import LoopSpec
from parammap import loop_feasibility

logger = get_logger("main")

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs")


def create_date_folder(base_dir="Data"):
    today = datetime.now().strftime('%Y-%m-%d')
    path = os.path.join(base_dir, today)
    os.makedirs(path, exist_ok=True)
    return path + os.sep


def run_batch(base_dir="Data", cfg=DEFAULT_CONFIG):
    """Braid every loop in configs/ and write a swallowtail point cloud into Data/<date>/."""
    folder_path = create_date_folder(base_dir)

    for path in sorted(glob.glob(os.path.join(CONFIG_DIR, "*.json"))):
        spec = LoopSpec.from_json_file(path)
        name = os.path.splitext(os.path.basename(path))[0]
        res = braid_loop(spec, cfg=cfg)
        payload = res.to_dict()
        payload["loop"] = spec.to_dict()
        payload["feasibility"] = loop_feasibility(spec, cfg).to_dict()
        write_json(os.path.join(folder_path, f"{name}_braid.json"), payload)
        write_table(os.path.join(folder_path, f"{name}_braid_strands.csv"), res.strands.rows(), STRAND_COLUMNS)
        logger.info(f"{name}: word {res.word}, permutation {[p + 1 for p in res.permutation]}")

    mesh = sample_surface_parametric("double-real", cfg=cfg)
    write_table(os.path.join(folder_path, "swallowtail_double_real.csv"), mesh.rows(), MESH_COLUMNS)
    logger.info(f"Wrote {len(mesh)} surface points to {folder_path}")
    return folder_path


if __name__ == "__main__":
    if len(sys.argv) > 1:
        cli()
    else:
        setup_logger(DEFAULT_CONFIG)
        run_batch()
