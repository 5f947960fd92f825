#pragma once

// Everything except the HTTP client, which pulls in cpp-httplib.

#include "pddl_instruct/core.hpp"
#include "pddl_instruct/sexpr.hpp"
#include "pddl_instruct/text.hpp"
#include "pddl_instruct/trace.hpp"
#include "pddl_instruct/validator.hpp"
#include "pddl_instruct/feedback.hpp"
#include "pddl_instruct/planner.hpp"
#include "pddl_instruct/domains.hpp"
#include "pddl_instruct/records.hpp"
#include "pddl_instruct/datagen.hpp"
#include "pddl_instruct/losses.hpp"
#include "pddl_instruct/config.hpp"
#include "pddl_instruct/prompts.hpp"
#include "pddl_instruct/backend.hpp"
#include "pddl_instruct/orchestrator.hpp"
#include "pddl_instruct/evaluation.hpp"
