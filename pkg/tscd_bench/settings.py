"""
Environment settings, read from the process environment after loading an optional .env file.
"""
import logging
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field


LOG_FORMAT = '%(asctime)s.%(msecs)03d %(levelname)s %(module)s - %(funcName)s: %(message)s'
LOG_DATEFMT = '%d-%m-%Y %H:%M:%S'

DEFAULT_OUTPUT_DIR = "results"


class Settings(BaseModel):
    """
    Attributes:
    - **logging_level** (str): DEBUG, INFO, WARNING or ERROR.
    - **output_dir** (str | None): Results directory when neither the CLI nor the config names one.
    - **jobs** (int | None): Worker count when the CLI does not give one.
    """
    logging_level: str = "ERROR"
    output_dir: Optional[str] = None
    jobs: Optional[int] = Field(default=None, ge=1)

    def resolve_output_dir(
            self,
            cli_value: Optional[str],
            config_value: Optional[str]) -> str:
        return cli_value or self.output_dir or config_value or DEFAULT_OUTPUT_DIR

    def resolve_jobs(
            self,
            cli_value: Optional[int],
            config_value: int) -> int:
        return cli_value or self.jobs or config_value


def load_settings() -> Settings:
    load_dotenv()

    jobs = os.getenv("TSCD_JOBS")

    return Settings(
        logging_level=os.getenv("LOGGING_LEVEL", "ERROR"),
        output_dir=os.getenv("TSCD_OUTPUT_DIR"),
        jobs=int(jobs) if jobs else None)


def configure_logging(logging_level_str: str) -> None:

    if logging_level_str == "DEBUG":
        logging_level = logging.DEBUG
    elif logging_level_str == "INFO":
        logging_level = logging.INFO
    elif logging_level_str == "WARNING":
        logging_level = logging.WARNING
    else:
        logging_level = logging.ERROR

    logging.basicConfig(
        level=logging_level,
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT)
