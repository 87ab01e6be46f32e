/* Solve a problem file and print u on a coarse grid.
 *
 *   cc solve.c -I../include -L<target>/release -lgevrey_fde_ffi -lm -lpthread -ldl
 *   ./a.out ../../core/problems/example2.json
 */
#include <stdio.h>

#include "gevrey_fde.h"

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: %s problem.json\n", argv[0]);
        return 4;
    }
    FdeProblem *problem = NULL;
    FdeStatus status = fde_problem_from_file(argv[1], &problem);
    if (status != FDE_STATUS_OK) {
        fprintf(stderr, "error: %s\n", fde_last_error());
        return status;
    }

    FdeConditions cond;
    status = fde_problem_check(problem, &cond);
    printf("theta %.17g r0 %.17g q %.17g passed %d\n", cond.theta, cond.r0, cond.q, cond.passed);

    FdeSolution *solution = NULL;
    status = fde_problem_solve(problem, NULL, &solution);
    if (status != FDE_STATUS_OK) {
        fprintf(stderr, "error: %s\n", fde_last_error());
        fde_solution_free(solution);
        fde_problem_free(problem);
        return status;
    }

    FdeSolutionInfo info;
    fde_solution_info(solution, &info);
    printf("iterations %u residual %.3e\n", info.iterations, info.residual_sup);
    for (int i = 0; i <= 4; i++) {
        double x = -1.0 + 0.5 * i, u;
        fde_solution_eval(solution, x, &u);
        printf("u(%g) = %.17g\n", x, u);
    }

    fde_solution_free(solution);
    fde_problem_free(problem);
    return 0;
}
