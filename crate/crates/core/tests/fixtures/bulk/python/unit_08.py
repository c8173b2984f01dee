"""Bulk module 8."""


class Worker8:
    def __init__(self, jobs):
        self.jobs = list(jobs)

    def run(self):
        done = 0
        for job in self.jobs:
            if job is None:
                continue
            done += 1
        while done > 8:
            done -= 1
        return done
