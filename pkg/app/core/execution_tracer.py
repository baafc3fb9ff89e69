"""
ExecutionTracer - Traçage des suites de vérification

Enregistre chaque suite du self-test (vecteurs, écarts, statut, durée).
"""

import time
import logging
from typing import Dict, Any, List, Optional
from enum import Enum
from dataclasses import dataclass, asdict

logger = logging.getLogger(__name__)


class StepStatus(str, Enum):
    """Status d'une suite"""
    SUCCESS = "ok"
    FAILED = "FAILED"
    SKIPPED = "skipped"


@dataclass
class ExecutionStep:
    """Représentation d'une suite exécutée"""
    step: int
    suite: str
    vectors: int = 0
    mismatches: int = 0
    duration: float = 0.0
    status: str = StepStatus.SUCCESS  # StepStatus
    error: Optional[str] = None
    first_failure: Optional[Dict[str, str]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dict for JSON serialization"""
        return {k: v for k, v in asdict(self).items() if v is not None}


class ExecutionTracer:
    """
    Tracer pour enregistrer les suites d'un self-test

    Usage:
        tracer = ExecutionTracer()

        with tracer.step("int-p57") as step:
            for vector in vectors:
                step.record(ok, None if ok else {"a": "..."})

        trace = tracer.get_trace()
    """

    def __init__(self):
        self.steps: List[ExecutionStep] = []
        self.start_time = time.time()

    def step(self, suite: str) -> 'StepContext':
        """
        Context manager pour tracer une suite

        Args:
            suite: Nom de la suite

        Returns:
            StepContext pour gérer la suite
        """
        return StepContext(self, suite)

    def add_step(self, step: ExecutionStep):
        """Ajouter une suite manuellement"""
        self.steps.append(step)
        logger.debug(
            f"[ExecutionTracer] Suite {step.step}: {step.suite} "
            f"({step.status}, {step.vectors} vecteurs, {step.mismatches} écarts)"
        )

    def get_trace(self) -> Dict[str, Any]:
        """
        Obtenir la trace complète

        Returns:
            Dict avec suites et summary
        """
        total_duration = time.time() - self.start_time

        status_counts = {
            "ok": sum(1 for s in self.steps if s.status == StepStatus.SUCCESS),
            "failed": sum(1 for s in self.steps if s.status == StepStatus.FAILED),
            "skipped": sum(1 for s in self.steps if s.status == StepStatus.SKIPPED),
        }

        return {
            "suites": [step.to_dict() for step in self.steps],
            "summary": {
                "total_suites": len(self.steps),
                "total_vectors": sum(s.vectors for s in self.steps),
                "total_duration": round(total_duration, 2),
                "status_counts": status_counts
            }
        }

    def has_failures(self) -> bool:
        """Vérifier s'il y a eu des échecs"""
        return any(step.status == StepStatus.FAILED for step in self.steps)


class StepContext:
    """Context manager pour une suite"""

    def __init__(self, tracer: ExecutionTracer, suite: str):
        self.tracer = tracer
        self.suite = suite
        self.step_number = len(tracer.steps) + 1
        self.start_time = time.time()
        self.vectors = 0
        self.mismatches = 0
        self.status = StepStatus.SUCCESS
        self.error: Optional[str] = None
        self.first_failure: Optional[Dict[str, str]] = None

    def __enter__(self) -> 'StepContext':
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        duration = time.time() - self.start_time

        # Si exception, marquer comme failed
        if exc_type is not None:
            self.status = StepStatus.FAILED
            self.error = str(exc_val)
        elif self.mismatches:
            self.status = StepStatus.FAILED

        step = ExecutionStep(
            step=self.step_number,
            suite=self.suite,
            vectors=self.vectors,
            mismatches=self.mismatches,
            duration=round(duration, 2),
            status=self.status,
            error=self.error,
            first_failure=self.first_failure
        )

        self.tracer.add_step(step)

        # Ne pas supprimer l'exception
        return False

    def record(self, ok: bool, failure: Optional[Dict[str, str]] = None):
        """Compter un vecteur ; garde le premier contre-exemple"""
        self.vectors += 1
        if not ok:
            self.mismatches += 1
            if self.first_failure is None:
                self.first_failure = failure

    def mark_skipped(self, reason: str):
        """Marquer comme sautée"""
        self.status = StepStatus.SKIPPED
        self.error = reason
