"""Course-scheduling environment: instances, assessment, exact solver and task builders."""

from planeval.course.generator import (
    DIFFICULTY_PARAMS,
    GeneratorParams,
    dataset_statistics,
    generate_instance,
)
from planeval.course.io import (
    InstanceRecord,
    load_worked_example,
    load_instance,
    save_instance,
)
from planeval.course.model import (
    AssignmentPlan,
    Classroom,
    CourseInstance,
    Difficulty,
    PlanAssessment,
    Section,
    TimeSlot,
    slots_overlap,
)
from planeval.course.plans import (
    DELTA,
    assess,
    corrupt_plan,
    plan_distance,
    slack_exceeds,
)
from planeval.course.solver import brute_force_solve, solve_exact
from planeval.course.tasks import (
    CourseSolverTask,
    PlanDistance,
    build_course_heuristic_task,
    build_course_verifier_task,
    grade_course_solution,
)

__all__ = [
    "DELTA",
    "DIFFICULTY_PARAMS",
    "AssignmentPlan",
    "Classroom",
    "CourseInstance",
    "CourseSolverTask",
    "Difficulty",
    "GeneratorParams",
    "InstanceRecord",
    "PlanAssessment",
    "PlanDistance",
    "Section",
    "TimeSlot",
    "assess",
    "brute_force_solve",
    "build_course_heuristic_task",
    "build_course_verifier_task",
    "corrupt_plan",
    "dataset_statistics",
    "generate_instance",
    "grade_course_solution",
    "load_worked_example",
    "load_instance",
    "plan_distance",
    "save_instance",
    "slack_exceeds",
    "slots_overlap",
    "solve_exact",
]
